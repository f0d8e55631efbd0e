use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use super::profile::{JointImportance, GROUP_COUNT, GROUP_NAMES};
use crate::error::{Error, Result};
use crate::features::FEATURE_LEN;
use crate::regression::{TraitModel, PERSONALITY_TRAITS};

/// Mean and population standard deviation of each group across several profiles.
#[derive(Debug, Clone, PartialEq)]
pub struct GroupSummary {
    pub traits: Vec<String>,
    pub mean: [f64; GROUP_COUNT],
    pub std: [f64; GROUP_COUNT],
}

pub fn summarize(profiles: &[&JointImportance]) -> Option<GroupSummary> {
    if profiles.is_empty() {
        return None;
    }
    let n = profiles.len() as f64;
    let mut mean = [0.0; GROUP_COUNT];
    let mut std = [0.0; GROUP_COUNT];
    for g in 0..GROUP_COUNT {
        mean[g] = profiles.iter().map(|p| p.reduced[g]).sum::<f64>() / n;
        std[g] = (profiles.iter().map(|p| (p.reduced[g] - mean[g]).powi(2)).sum::<f64>() / n).sqrt();
    }
    Some(GroupSummary {
        traits: profiles.iter().map(|p| p.trait_name.clone()).collect(),
        mean,
        std,
    })
}

pub fn profiles_from_models(models: &[TraitModel]) -> Result<Vec<JointImportance>> {
    for m in models {
        if m.input_dim() != FEATURE_LEN {
            return Err(Error::Layout(format!(
                "model for `{}` has {} inputs, expected {FEATURE_LEN}",
                m.trait_name,
                m.input_dim()
            )));
        }
    }
    if let Some(first) = models.first() {
        if let Some(other) = models.iter().find(|m| m.input_kind != first.input_kind) {
            return Err(Error::Layout(format!(
                "models mix {} (`{}`) and {} (`{}`) features",
                first.input_kind, first.trait_name, other.input_kind, other.trait_name
            )));
        }
    }
    models
        .iter()
        .map(|m| JointImportance::from_weights(&m.trait_name, &m.regressor.feature_weights()))
        .collect()
}

fn csv_header() -> String {
    GROUP_NAMES.join(",")
}

pub fn profile_csv(p: &JointImportance) -> String {
    let row: Vec<String> = p.reduced.iter().map(|v| v.to_string()).collect();
    format!("{}\n{}\n", csv_header(), row.join(","))
}

/// Rows are groups; one column per trait, then mean and std.
pub fn summary_csv(profiles: &[&JointImportance], summary: &GroupSummary) -> String {
    let mut s = String::from("group");
    for p in profiles {
        let _ = write!(s, ",{}", p.trait_name);
    }
    s.push_str(",mean,std\n");
    for g in 0..GROUP_COUNT {
        s.push_str(GROUP_NAMES[g]);
        for p in profiles {
            let _ = write!(s, ",{}", p.reduced[g]);
        }
        let _ = writeln!(s, ",{},{}", summary.mean[g], summary.std[g]);
    }
    s
}

const PALETTE: [&str; 7] = ["#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b", "#e377c2"];

fn escape(text: &str) -> String {
    text.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

/// 12-axis radar chart, one closed polyline per series, values in `[0, 1]`.
pub fn radar_svg(title: &str, series: &[(&str, &[f64; GROUP_COUNT])], mean: Option<&[f64; GROUP_COUNT]>) -> String {
    let (cx, cy, r) = (260.0, 270.0, 170.0);
    let point = |g: usize, v: f64| {
        let a = -std::f64::consts::FRAC_PI_2 + std::f64::consts::TAU * g as f64 / GROUP_COUNT as f64;
        (cx + r * v * a.cos(), cy + r * v * a.sin())
    };
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="680" height="540" viewBox="0 0 680 540" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(s, r#"<rect width="680" height="540" fill="white"/>"#);
    let _ = writeln!(s, r#"<text x="260" y="28" text-anchor="middle" font-size="16">{}</text>"#, escape(title));
    for ring in [0.25, 0.5, 0.75, 1.0] {
        let pts: Vec<String> = (0..GROUP_COUNT)
            .map(|g| {
                let (x, y) = point(g, ring);
                format!("{x:.2},{y:.2}")
            })
            .collect();
        let _ = writeln!(s, r##"<polygon points="{}" fill="none" stroke="#cccccc"/>"##, pts.join(" "));
    }
    for (g, name) in GROUP_NAMES.iter().enumerate() {
        let (x, y) = point(g, 1.0);
        let (lx, ly) = point(g, 1.12);
        let _ = writeln!(s, r##"<line x1="{cx}" y1="{cy}" x2="{x:.2}" y2="{y:.2}" stroke="#999999"/>"##);
        let _ = writeln!(
            s,
            r#"<text x="{lx:.2}" y="{ly:.2}" text-anchor="middle" dominant-baseline="middle">{name}</text>"#
        );
    }
    let mut legend: Vec<(String, &str, f64)> = Vec::new();
    for (i, (name, values)) in series.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let _ = writeln!(s, "{}", polygon(values, &point, color, 2.0));
        legend.push((escape(name), color, 2.0));
    }
    if let Some(m) = mean {
        let _ = writeln!(s, "{}", polygon(m, &point, "#000000", 3.5));
        legend.push(("mean".into(), "#000000", 3.5));
    }
    for (i, (name, color, width)) in legend.iter().enumerate() {
        let y = 70.0 + 22.0 * i as f64;
        let _ = writeln!(
            s,
            r#"<line x1="520" y1="{y}" x2="550" y2="{y}" stroke="{color}" stroke-width="{width}"/><text x="558" y="{y}" dominant-baseline="middle">{name}</text>"#
        );
    }
    s.push_str("</svg>\n");
    s
}

fn polygon(values: &[f64; GROUP_COUNT], point: &dyn Fn(usize, f64) -> (f64, f64), color: &str, width: f64) -> String {
    let pts: Vec<String> = values
        .iter()
        .enumerate()
        .map(|(g, &v)| {
            let (x, y) = point(g, v.clamp(0.0, 1.0));
            format!("{x:.2},{y:.2}")
        })
        .collect();
    format!(
        r#"<polygon points="{}" fill="none" stroke="{color}" stroke-width="{width}" stroke-linejoin="round"/>"#,
        pts.join(" ")
    )
}

fn put(path: PathBuf, text: &str, written: &mut Vec<PathBuf>) -> Result<()> {
    std::fs::write(&path, text).map_err(|e| Error::io(&path, e))?;
    written.push(path);
    Ok(())
}

/// Writes per-trait CSVs, the personality summary and the radar charts into `out`.
/// Returns the written paths in creation order.
pub fn write_importance_report(profiles: &[JointImportance], out: &Path) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(out).map_err(|e| Error::io(out, e))?;
    let mut written = Vec::new();
    for p in profiles {
        put(out.join(format!("importance_{}.csv", p.trait_name)), &profile_csv(p), &mut written)?;
    }
    let json = serde_json::to_string_pretty(profiles).map_err(|e| Error::json(out, e))? + "\n";
    put(out.join("importance.json"), &json, &mut written)?;

    let quotient: Vec<&JointImportance> =
        profiles.iter().filter(|p| p.trait_name == "EQ" || p.trait_name == "SQ").collect();
    if !quotient.is_empty() {
        let series: Vec<(&str, &[f64; GROUP_COUNT])> =
            quotient.iter().map(|p| (p.trait_name.as_str(), &p.reduced)).collect();
        put(out.join("radar_eq_sq.svg"), &radar_svg("Relative importance of joints: EQ and SQ", &series, None), &mut written)?;
    }
    let personality: Vec<&JointImportance> = profiles
        .iter()
        .filter(|p| PERSONALITY_TRAITS.contains(&p.trait_name.as_str()))
        .collect();
    if let Some(summary) = summarize(&personality) {
        put(out.join("importance_personality_summary.csv"), &summary_csv(&personality, &summary), &mut written)?;
        let series: Vec<(&str, &[f64; GROUP_COUNT])> =
            personality.iter().map(|p| (p.trait_name.as_str(), &p.reduced)).collect();
        put(
            out.join("radar_personality.svg"),
            &radar_svg("Relative importance of joints: personality", &series, Some(&summary.mean)),
            &mut written,
        )?;
    }
    if !profiles.is_empty() {
        let series: Vec<(&str, &[f64; GROUP_COUNT])> =
            profiles.iter().map(|p| (p.trait_name.as_str(), &p.reduced)).collect();
        put(out.join("radar_all.svg"), &radar_svg("Relative importance of joints", &series, None), &mut written)?;
    }
    Ok(written)
}

pub fn importance_report(models: &[TraitModel], out: &Path) -> Result<Vec<PathBuf>> {
    write_importance_report(&profiles_from_models(models)?, out)
}
