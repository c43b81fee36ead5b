//! Summary tables and static SVG plots for a finished sweep directory.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use plotters::prelude::*;

use bfdcqo_core::runner::{Algorithm, RunReport};
use bfdcqo_core::sweep::{read_rows, scaling_fits, summarize, SummaryRow, RUNS_DIR, UNDEFINED};

const PALETTE: [RGBColor; 4] = [RGBColor(31, 119, 180), RGBColor(214, 39, 40), RGBColor(44, 160, 44), RGBColor(148, 103, 189)];

fn color_of(a: Algorithm) -> RGBColor {
    PALETTE[Algorithm::ALL.iter().position(|&x| x == a).unwrap_or(0)]
}

fn cell(v: Option<f64>) -> String {
    match v {
        Some(x) if x.is_infinite() => "inf".to_string(),
        Some(x) => x.to_string(),
        None => UNDEFINED.to_string(),
    }
}

fn write_summary(summary: &[SummaryRow], path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record([
        "algorithm",
        "n",
        "cells",
        "errors",
        "mean_p_gs",
        "mean_p_gs_first",
        "mean_approximation_ratio_mean",
        "mean_approximation_ratio_best",
        "tts_of_mean",
    ])?;
    for s in summary {
        w.write_record([
            s.algorithm.to_string(),
            s.n.to_string(),
            s.cells.to_string(),
            s.errors.to_string(),
            cell(s.mean_p_gs),
            cell(s.mean_p_gs_first),
            cell(s.mean_approximation_ratio_mean),
            cell(s.mean_approximation_ratio_best),
            cell(s.tts_of_mean),
        ])?;
    }
    w.flush()?;
    Ok(())
}

fn write_fits(summary: &[SummaryRow], path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["algorithm", "slope", "intercept", "r_squared"])?;
    for (a, f) in scaling_fits(summary) {
        w.write_record([a.to_string(), f.slope.to_string(), f.intercept.to_string(), f.r_squared.to_string()])?;
    }
    w.flush()?;
    Ok(())
}

fn plot_success(summary: &[SummaryRow], path: &Path) -> Result<()> {
    let points: Vec<(Algorithm, usize, f64)> = summary
        .iter()
        .filter_map(|s| s.mean_p_gs.filter(|p| *p > 0.0).map(|p| (s.algorithm, s.n, p)))
        .collect();
    if points.is_empty() {
        return Ok(());
    }
    let nmin = points.iter().map(|p| p.1).min().unwrap() as f64;
    let nmax = points.iter().map(|p| p.1).max().unwrap() as f64;
    let pmin = points.iter().map(|p| p.2).fold(f64::INFINITY, f64::min);
    let pmax = points.iter().map(|p| p.2).fold(0.0, f64::max);

    let root = SVGBackend::new(path, (800, 560)).into_drawing_area();
    root.fill(&WHITE)?;
    let mut chart = ChartBuilder::on(&root)
        .caption("mean ground-state probability vs size", ("sans-serif", 20))
        .margin(15)
        .x_label_area_size(40)
        .y_label_area_size(70)
        .build_cartesian_2d((nmin - 0.5)..(nmax + 0.5), (pmin * 0.5..(pmax * 2.0).min(1.0)).log_scale())?;
    chart.configure_mesh().x_desc("n").y_desc("mean p_gs").draw()?;
    for a in Algorithm::ALL {
        let series: Vec<(f64, f64)> = points.iter().filter(|p| p.0 == a).map(|p| (p.1 as f64, p.2)).collect();
        if series.is_empty() {
            continue;
        }
        let color = color_of(a);
        chart
            .draw_series(LineSeries::new(series.clone(), color.stroke_width(2)))?
            .label(a.to_string())
            .legend(move |(x, y)| PathElement::new(vec![(x, y), (x + 20, y)], color.stroke_width(2)));
        chart.draw_series(series.into_iter().map(|p| Circle::new(p, 4, color.filled())))?;
    }
    chart
        .configure_series_labels()
        .background_style(WHITE.mix(0.8))
        .border_style(BLACK)
        .draw()?;
    root.present()?;
    Ok(())
}

/// Preference order among run files: BF-DCQO first, then larger `n`, then
/// smaller seed.
type RunKey = (bool, usize, std::cmp::Reverse<u64>);

/// Run file shown in the histogram figure: the BF-DCQO cell with the largest
/// size and smallest seed, falling back to any algorithm.
fn pick_run(dir: &Path) -> Result<Option<PathBuf>> {
    let runs = dir.join(RUNS_DIR);
    if !runs.is_dir() {
        return Ok(None);
    }
    let mut best: Option<(RunKey, PathBuf)> = None;
    for entry in fs::read_dir(&runs)? {
        let path = entry?.path();
        let Some(stem) = path.file_stem().and_then(|s| s.to_str()) else {
            continue;
        };
        let parts: Vec<&str> = stem.splitn(3, '_').collect();
        if parts.len() != 3 {
            continue;
        }
        let (Some(n), Some(seed)) = (
            parts[0].strip_prefix('n').and_then(|v| v.parse::<usize>().ok()),
            parts[1].strip_prefix('s').and_then(|v| v.parse::<u64>().ok()),
        ) else {
            continue;
        };
        let key = (parts[2] == "bfdcqo", n, std::cmp::Reverse(seed));
        if best.as_ref().is_none_or(|(k, _)| key > *k) {
            best = Some((key, path));
        }
    }
    Ok(best.map(|(_, p)| p))
}

fn plot_histograms(report: &RunReport, title: &str, path: &Path) -> Result<()> {
    let k = report.records.len();
    let cols = k.min(5);
    let rows = k.div_ceil(cols);
    let root = SVGBackend::new(path, (260 * cols as u32, 220 * rows as u32 + 40)).into_drawing_area();
    root.fill(&WHITE)?;
    let root = root.titled(title, ("sans-serif", 20))?;
    let emin = report.records.iter().map(|r| r.histogram.edges[0]).fold(f64::INFINITY, f64::min);
    let emax = report
        .records
        .iter()
        .map(|r| *r.histogram.edges.last().unwrap())
        .fold(f64::NEG_INFINITY, f64::max);
    let (emin, emax) = if emax > emin { (emin, emax) } else { (emin - 1.0, emin + 1.0) };
    for (panel, rec) in root.split_evenly((rows, cols)).iter().zip(&report.records) {
        let total = rec.samples.n_shots.max(1) as f64;
        let ymax = rec.histogram.counts.iter().copied().max().unwrap_or(1) as f64 / total;
        let mut chart = ChartBuilder::on(panel)
            .caption(format!("iteration {}", rec.index), ("sans-serif", 14))
            .margin(8)
            .x_label_area_size(25)
            .y_label_area_size(40)
            .build_cartesian_2d(emin..emax, 0.0..(ymax * 1.1).max(1e-3))?;
        chart.configure_mesh().x_labels(4).y_labels(4).draw()?;
        let color = color_of(report.algorithm);
        chart.draw_series(rec.histogram.counts.iter().enumerate().map(|(b, &c)| {
            let x0 = rec.histogram.edges[b];
            let x1 = rec.histogram.edges[b + 1];
            Rectangle::new([(x0, 0.0), (x1, c as f64 / total)], color.mix(0.7).filled())
        }))?;
        if let Some(e) = report.ground_energy {
            chart.draw_series(LineSeries::new(vec![(e, 0.0), (e, ymax * 1.1)], BLACK.stroke_width(1)))?;
        }
    }
    root.present()?;
    Ok(())
}

fn plot_ratio(report: &RunReport, path: &Path) -> Result<()> {
    let series: Vec<(f64, f64, f64)> = report
        .records
        .iter()
        .filter_map(|r| Some((r.index as f64, r.approximation_ratio_mean?, r.approximation_ratio_best?)))
        .collect();
    if series.is_empty() {
        return Ok(());
    }
    let lo = series.iter().map(|s| s.1.min(s.2)).fold(f64::INFINITY, f64::min).min(0.0);
    let root = SVGBackend::new(path, (700, 480)).into_drawing_area();
    root.fill(&WHITE)?;
    let mut chart = ChartBuilder::on(&root)
        .caption("approximation ratio per iteration", ("sans-serif", 20))
        .margin(15)
        .x_label_area_size(40)
        .y_label_area_size(60)
        .build_cartesian_2d(0.5..(series.len() as f64 + 0.5), lo..1.05)?;
    chart.configure_mesh().x_desc("iteration").y_desc("E / E_gs").draw()?;
    for (label, color, pick) in [
        ("mean energy", PALETTE[0], 1usize),
        ("best energy", PALETTE[1], 2usize),
    ] {
        let pts: Vec<(f64, f64)> = series.iter().map(|s| (s.0, if pick == 1 { s.1 } else { s.2 })).collect();
        chart
            .draw_series(LineSeries::new(pts.clone(), color.stroke_width(2)))?
            .label(label)
            .legend(move |(x, y)| PathElement::new(vec![(x, y), (x + 20, y)], color.stroke_width(2)));
        chart.draw_series(pts.into_iter().map(|p| Circle::new(p, 3, color.filled())))?;
    }
    chart
        .configure_series_labels()
        .background_style(WHITE.mix(0.8))
        .border_style(BLACK)
        .draw()?;
    root.present()?;
    Ok(())
}

/// Writes `summary.csv`, `scaling_fits.csv`, `p_gs_vs_n.svg` and, when run
/// files were saved, `energy_histograms.svg` and `approximation_ratio.svg`.
pub fn render(input: &Path, out: &Path) -> Result<()> {
    let rows = read_rows(input).with_context(|| format!("reading sweep in {}", input.display()))?;
    if rows.is_empty() {
        bail!("no finished cells in {}", input.display());
    }
    fs::create_dir_all(out)?;
    let summary = summarize(&rows);
    write_summary(&summary, &out.join("summary.csv"))?;
    write_fits(&summary, &out.join("scaling_fits.csv"))?;
    plot_success(&summary, &out.join("p_gs_vs_n.svg"))?;
    if let Some(path) = pick_run(input)? {
        let report = RunReport::read(&path).with_context(|| format!("reading {}", path.display()))?;
        let name = path.file_stem().and_then(|s| s.to_str()).unwrap_or("run");
        plot_histograms(&report, &format!("sampled energies per iteration ({name})"), &out.join("energy_histograms.svg"))?;
        plot_ratio(&report, &out.join("approximation_ratio.svg"))?;
    }
    eprintln!("report written to {}", out.display());
    Ok(())
}
