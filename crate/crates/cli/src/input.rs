//! Source terms from flags, config keys, or `x,value` sample files.

use std::path::Path;

use anyhow::{bail, Context, Result};
use hillstab::PeriodicFunction;

use crate::config::{Effective, Settings};

/// `s(x) = -alpha + beta cos(2 kappa x)` sampled on its period `2π/κ`.
/// Unlike the dedicated cosine-problem type this accepts any finite
/// `alpha`, so inconclusive regimes can be inspected too.
pub fn cosine_source(alpha: f64, beta: f64, kappa: f64) -> Result<PeriodicFunction<f64>> {
    if !(kappa.is_finite() && kappa > 0.0) {
        bail!("kappa must be finite and positive, got {kappa}");
    }
    if !(alpha.is_finite() && beta.is_finite()) {
        bail!("alpha and beta must be finite");
    }
    let period = 2.0 * std::f64::consts::PI / kappa;
    Ok(PeriodicFunction::from_fn(
        move |x| -alpha + beta * (2.0 * kappa * x).cos(),
        period,
        256,
    )?)
}

/// Reads `x,value` samples on a uniform grid; the period is inferred as
/// `n·dx`. Lines starting with `#` and an optional header row are skipped.
pub fn samples_from_csv(path: &Path) -> Result<PeriodicFunction<f64>> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("reading samples {}", path.display()))?;
    let mut xs: Vec<f64> = Vec::new();
    let mut values: Vec<f64> = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut fields = line.split(',');
        let (Some(x_raw), Some(v_raw)) = (fields.next(), fields.next()) else {
            bail!("{}:{}: expected `x,value`", path.display(), idx + 1);
        };
        let x_raw = x_raw.trim();
        if xs.is_empty() && x_raw.parse::<f64>().is_err() {
            // Header row.
            continue;
        }
        let parse = |raw: &str, what: &str| -> Result<f64> {
            raw.trim()
                .parse()
                .with_context(|| format!("{}:{}: bad {what} {raw:?}", path.display(), idx + 1))
        };
        xs.push(parse(x_raw, "x")?);
        values.push(parse(v_raw, "value")?);
    }
    if xs.len() < 2 {
        bail!("{}: need at least two samples", path.display());
    }
    let dx = xs[1] - xs[0];
    if !(dx.is_finite() && dx > 0.0) {
        bail!("{}: x must be strictly increasing", path.display());
    }
    for (i, w) in xs.windows(2).enumerate() {
        if ((w[1] - w[0]) - dx).abs() > 1e-6 * dx {
            bail!(
                "{}: non-uniform grid between samples {} and {}",
                path.display(),
                i,
                i + 1
            );
        }
    }
    Ok(PeriodicFunction::from_samples(values, dx * xs.len() as f64)?)
}

/// Resolves the source for `check` and `spectrum`: `--mathieu A B K`, then
/// `--csv FILE`, then the config keys (`csv`, or `alpha`/`beta`/`kappa`).
pub fn resolve_source(
    mathieu: Option<&[f64]>,
    csv: Option<&Path>,
    settings: &Settings,
    eff: &mut Effective,
) -> Result<PeriodicFunction<f64>> {
    let from_cosine = |alpha: f64, beta: f64, kappa: f64, eff: &mut Effective| {
        eff.set("alpha", alpha);
        eff.set("beta", beta);
        eff.set("kappa", kappa);
        cosine_source(alpha, beta, kappa)
    };
    if let Some(params) = mathieu {
        return from_cosine(params[0], params[1], params[2], eff);
    }
    if let Some(path) = csv {
        eff.set("csv", path.display());
        return samples_from_csv(path);
    }
    if let Some(path) = settings.str("csv") {
        eff.set("csv", path);
        return samples_from_csv(Path::new(path));
    }
    match (
        settings.f64("alpha")?,
        settings.f64("beta")?,
        settings.f64("kappa")?,
    ) {
        (Some(a), Some(b), Some(k)) => from_cosine(a, b, k, eff),
        _ => bail!("no source given: use --mathieu A B K, --csv FILE, or config keys"),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_samples_round_trip() {
        let dir = std::env::temp_dir().join("hillstab-input-test");
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("samples.csv");

        let n = 16;
        let dx = 2.0 * std::f64::consts::PI / n as f64;
        let mut text = String::from("x,value\n# a comment\n");
        for j in 0..n {
            let x = j as f64 * dx;
            text.push_str(&format!("{:.16e},{:.16e}\n", x, x.sin() - 1.0));
        }
        std::fs::write(&path, text).unwrap();
        let s = samples_from_csv(&path).unwrap();
        assert_eq!(s.len(), n);
        assert!((s.period() - 2.0 * std::f64::consts::PI).abs() < 1e-12);
        assert!((s.mean() + 1.0).abs() < 1e-12);

        std::fs::write(&path, "x,value\n0.0,1.0\n0.5,1.0\n1.7,1.0\n").unwrap();
        assert!(samples_from_csv(&path).is_err());
        std::fs::write(&path, "0.0,1.0\n0.5,zebra\n").unwrap();
        assert!(samples_from_csv(&path).is_err());
    }
}
