//! Pearson correlation with two-sided significance, and the score-delta
//! correlation table.

use std::fmt::Write as _;

use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::error::{Error, Result};
use crate::parser::ParserKind;

/// Sample Pearson correlation and its two-sided p-value.
///
/// `r` comes from the centered-sum formula `sxy / sqrt(sxx * syy)`; the
/// p-value from the statistic `t = r * sqrt((n-2) / (1-r^2))` under
/// Student's t with `n-2` degrees of freedom. `|r| = 1` yields `p = 0`.
///
/// Errors when the vectors differ in length, have fewer than 3 elements,
/// or either has zero variance.
pub fn pearson(x: &[f64], y: &[f64]) -> Result<(f64, f64)> {
    if x.len() != y.len() {
        return Err(Error::usage(format!(
            "pearson: length mismatch ({} vs {})",
            x.len(),
            y.len()
        )));
    }
    let n = x.len();
    if n < 3 {
        return Err(Error::usage(format!("pearson: need at least 3 points, got {n}")));
    }
    let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
    let (mx, my) = (mean(x), mean(y));
    let mut sxx = 0.0;
    let mut syy = 0.0;
    let mut sxy = 0.0;
    for (&xi, &yi) in x.iter().zip(y) {
        let (dx, dy) = (xi - mx, yi - my);
        sxx += dx * dx;
        syy += dy * dy;
        sxy += dx * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(Error::UndefinedCorrelation(format!(
            "zero variance in {} input",
            if sxx == 0.0 { "first" } else { "second" }
        )));
    }
    let r = (sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0);

    let df = (n - 2) as f64;
    let p = if 1.0 - r * r <= 0.0 {
        0.0
    } else {
        let t = r * (df / (1.0 - r * r)).sqrt();
        let dist = StudentsT::new(0.0, 1.0, df).expect("valid dof");
        2.0 * (1.0 - dist.cdf(t.abs()))
    };
    Ok((r, p.clamp(0.0, 1.0)))
}

/// The data-size and overlap dimensions correlated against score deltas.
pub const FEATURE_NAMES: [&str; 5] = [
    "um_forms",
    "um_lemmas",
    "src_train_sents",
    "pct_feats_shared",
    "pct_lemmas_shared",
];

/// One (target, source, parser) result with its explanatory features.
#[derive(Debug, Clone, PartialEq)]
pub struct AnalysisRow {
    pub pair: String,
    pub kind: ParserKind,
    pub delta_uas: f64,
    pub delta_las: f64,
    /// um_forms, um_lemmas, src_train_sents, pct_feats_shared,
    /// pct_lemmas_shared — same order as [`FEATURE_NAMES`].
    pub features: [f64; 5],
}

/// One correlation cell.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationCell {
    pub kind: ParserKind,
    pub metric: &'static str, // "delta_uas" | "delta_las"
    pub feature: &'static str,
    pub r: f64,
    pub p: f64,
    /// p < 0.05
    pub significant: bool,
}

/// Correlate every feature with ΔUAS and ΔLAS per parser kind: one cell
/// per (feature, metric, kind). Errors from [`pearson`] propagate.
pub fn correlation_analysis(rows: &[AnalysisRow]) -> Result<Vec<CorrelationCell>> {
    if rows.len() < 3 {
        return Err(Error::usage(format!(
            "correlation_analysis: need at least 3 rows, got {}",
            rows.len()
        )));
    }
    let mut kinds: Vec<ParserKind> = Vec::new();
    for row in rows {
        if !kinds.contains(&row.kind) {
            kinds.push(row.kind);
        }
    }
    kinds.sort_by_key(|k| k.to_string());

    let mut cells = Vec::new();
    for &kind in &kinds {
        let of_kind: Vec<&AnalysisRow> = rows.iter().filter(|r| r.kind == kind).collect();
        for (fi, feature) in FEATURE_NAMES.iter().enumerate() {
            let x: Vec<f64> = of_kind.iter().map(|r| r.features[fi]).collect();
            for (metric, y) in [
                ("delta_uas", of_kind.iter().map(|r| r.delta_uas).collect::<Vec<_>>()),
                ("delta_las", of_kind.iter().map(|r| r.delta_las).collect::<Vec<_>>()),
            ] {
                let (r, p) = pearson(&x, &y)?;
                cells.push(CorrelationCell {
                    kind,
                    metric,
                    feature,
                    r,
                    p,
                    significant: p < 0.05,
                });
            }
        }
    }
    Ok(cells)
}

const ROW_HEADER: &str =
    "pair\tkind\tdelta_uas\tdelta_las\tum_forms\tum_lemmas\tsrc_train_sents\tpct_feats_shared\tpct_lemmas_shared";

/// Serialize analysis rows as TSV with a header line.
pub fn render_analysis_rows(rows: &[AnalysisRow]) -> String {
    let mut out = String::from(ROW_HEADER);
    out.push('\n');
    for r in rows {
        let _ = writeln!(
            out,
            "{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}",
            r.pair,
            r.kind,
            r.delta_uas,
            r.delta_las,
            r.features[0],
            r.features[1],
            r.features[2],
            r.features[3],
            r.features[4]
        );
    }
    out
}

/// Parse the TSV emitted by [`render_analysis_rows`].
pub fn parse_analysis_rows(text: &str, name: &str) -> Result<Vec<AnalysisRow>> {
    let mut rows = Vec::new();
    for (i, raw) in text.split('\n').enumerate() {
        let line = raw.strip_suffix('\r').unwrap_or(raw);
        if line.is_empty() || line.starts_with('#') || line == ROW_HEADER {
            continue;
        }
        let cols: Vec<&str> = line.split('\t').collect();
        if cols.len() != 9 {
            return Err(Error::parse(
                name,
                i + 1,
                format!("expected 9 tab-separated columns, found {}", cols.len()),
            ));
        }
        let num = |j: usize| -> Result<f64> {
            cols[j]
                .parse()
                .map_err(|_| Error::parse(name, i + 1, format!("bad number {:?}", cols[j])))
        };
        rows.push(AnalysisRow {
            pair: cols[0].to_string(),
            kind: cols[1].parse()?,
            delta_uas: num(2)?,
            delta_las: num(3)?,
            features: [num(4)?, num(5)?, num(6)?, num(7)?, num(8)?],
        });
    }
    Ok(rows)
}

/// Render correlation cells as an aligned text table, flagging p < 0.05
/// with `*`.
pub fn render_correlation_table(cells: &[CorrelationCell]) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{:<20} {:<4} {:<10} {:>8} {:>10}  sig", "feature", "kind", "metric", "r", "p");
    for c in cells {
        let _ = writeln!(
            out,
            "{:<20} {:<4} {:<10} {:>8.3} {:>10.4}  {}",
            c.feature,
            c.kind.to_string(),
            c.metric,
            c.r,
            c.p,
            if c.significant { "*" } else { "" }
        );
    }
    out
}

/// Render correlation cells as TSV, one row per cell.
pub fn render_correlation_tsv(cells: &[CorrelationCell]) -> String {
    let mut out = String::from("feature\tkind\tmetric\tr\tp\tsignificant\n");
    for c in cells {
        let _ = writeln!(
            out,
            "{}\t{}\t{}\t{}\t{}\t{}",
            c.feature, c.kind, c.metric, c.r, c.p, c.significant
        );
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn perfect_positive_correlation() {
        let (r, p) = pearson(&[1.0, 2.0, 3.0], &[2.0, 4.0, 6.0]).unwrap();
        assert_eq!(r, 1.0);
        assert_eq!(p, 0.0);
    }

    #[test]
    fn perfect_negative_correlation() {
        let (r, _) = pearson(&[1.0, 2.0, 3.0], &[6.0, 4.0, 2.0]).unwrap();
        assert_eq!(r, -1.0);
    }

    #[test]
    fn hand_computed_point_eight() {
        let (r, _) = pearson(&[1.0, 2.0, 3.0, 4.0], &[1.0, 3.0, 2.0, 4.0]).unwrap();
        assert!((r - 0.8).abs() < 1e-12, "r = {r}");
    }

    #[test]
    fn zero_r_gives_p_one() {
        // x symmetric, y symmetric around the mean: r = 0 exactly.
        let x: Vec<f64> = (1..=10).map(f64::from).collect();
        let y = vec![1.0, -1.0, 1.0, -1.0, 1.0, 1.0, -1.0, 1.0, -1.0, 1.0];
        let (r, p) = pearson(&x, &y).unwrap();
        assert!(r.abs() < 1e-12, "r = {r}");
        assert!((p - 1.0).abs() < 1e-9, "p = {p}");
    }

    #[test]
    fn self_correlation_is_one() {
        let x = vec![3.0, 1.0, 4.0, 1.0, 5.0];
        let (r, _) = pearson(&x, &x).unwrap();
        assert_eq!(r, 1.0);
    }

    #[test]
    fn zero_variance_is_an_error() {
        assert!(matches!(
            pearson(&[1.0, 1.0, 1.0], &[1.0, 2.0, 3.0]),
            Err(Error::UndefinedCorrelation(_))
        ));
    }

    #[test]
    fn length_mismatch_and_short_input_are_usage_errors() {
        assert!(matches!(pearson(&[1.0, 2.0], &[1.0]), Err(Error::Usage(_))));
        assert!(matches!(pearson(&[1.0, 2.0], &[1.0, 2.0]), Err(Error::Usage(_))));
    }

    /// Independent oracle: the raw-moment form of the same coefficient.
    fn pearson_raw_moments(x: &[f64], y: &[f64]) -> f64 {
        let n = x.len() as f64;
        let sx: f64 = x.iter().sum();
        let sy: f64 = y.iter().sum();
        let sxx: f64 = x.iter().map(|v| v * v).sum();
        let syy: f64 = y.iter().map(|v| v * v).sum();
        let sxy: f64 = x.iter().zip(y).map(|(a, b)| a * b).sum();
        (n * sxy - sx * sy) / ((n * sxx - sx * sx).sqrt() * (n * syy - sy * sy).sqrt())
    }

    #[test]
    fn matches_raw_moment_formula() {
        let mut rng = crate::rng::SplitMix64::new(5);
        for _ in 0..200 {
            let n = 3 + (rng.next_below(20) as usize);
            let x: Vec<f64> = (0..n).map(|_| rng.next_f64() * 10.0).collect();
            let y: Vec<f64> = (0..n).map(|_| rng.next_f64() * 10.0).collect();
            let (r, _) = pearson(&x, &y).unwrap();
            assert!((r - pearson_raw_moments(&x, &y)).abs() < 1e-12);
        }
    }

    fn toy_rows() -> Vec<AnalysisRow> {
        let mut rows = Vec::new();
        for kind in [ParserKind::Gb, ParserKind::Sl] {
            for i in 0..5 {
                let v = i as f64;
                rows.push(AnalysisRow {
                    pair: format!("p{i}"),
                    kind,
                    delta_uas: v,
                    delta_las: 4.0 - v,
                    features: [v, v * 2.0, 10.0 - v, v * v + 1.0, 3.0 * v + 0.5],
                });
            }
        }
        rows
    }

    #[test]
    fn analysis_produces_twenty_cells() {
        let cells = correlation_analysis(&toy_rows()).unwrap();
        assert_eq!(cells.len(), 20);
        // delta_uas equals um_forms exactly -> r = 1 for that cell.
        let cell = cells
            .iter()
            .find(|c| c.kind == ParserKind::Gb && c.feature == "um_forms" && c.metric == "delta_uas")
            .unwrap();
        assert_eq!(cell.r, 1.0);
        assert!(cell.significant);
    }

    #[test]
    fn analysis_rows_round_trip() {
        let rows = toy_rows();
        let text = render_analysis_rows(&rows);
        let parsed = parse_analysis_rows(&text, "rows").unwrap();
        assert_eq!(parsed, rows);
    }
}
