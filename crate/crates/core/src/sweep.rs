//! Parameter sweeps over the discount factor, written as deterministic CSV.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::equilibrium::{d_star_numeric, threshold_delta, DiscountFactor, Variant};
use crate::error::{Error, Result};
use crate::payoffs::ClosedFormSource;

pub fn variant_label(variant: Variant) -> String {
    match variant {
        Variant::Benchmark => "benchmark".to_string(),
        Variant::NonNaiveG => "nonnaive_g".to_string(),
        Variant::NonNaiveB => "nonnaive_b".to_string(),
        Variant::LimitedK(k) => format!("limited_k{}", k.get()),
    }
}

pub fn source_label(source: ClosedFormSource) -> &'static str {
    match source {
        ClosedFormSource::AsPrinted => "printed",
        ClosedFormSource::IntegrandFaithful => "faithful",
    }
}

#[derive(Debug, Clone)]
pub struct SweepSpec {
    pub variants: Vec<Variant>,
    pub sources: Vec<ClosedFormSource>,
    pub delta_from: f64,
    pub delta_to: f64,
    pub steps: u32,
}

impl SweepSpec {
    pub fn validate(&self) -> Result<()> {
        if self.variants.is_empty() || self.sources.is_empty() {
            return Err(Error::domain("sweep needs at least one variant and one source"));
        }
        if self.steps < 2 {
            return Err(Error::domain("sweep needs at least 2 grid points"));
        }
        if !(self.delta_from < self.delta_to) {
            return Err(Error::domain("sweep grid needs delta-from < delta-to"));
        }
        if !(self.delta_from >= 0.0) || !(self.delta_to < 1.0) {
            return Err(Error::domain("sweep grid must stay inside [0, 1)"));
        }
        Ok(())
    }

    pub fn grid(&self) -> Vec<f64> {
        let n = self.steps as usize;
        (0..n)
            .map(|i| {
                self.delta_from
                    + (self.delta_to - self.delta_from) * i as f64 / (n - 1) as f64
            })
            .collect()
    }
}

/// Renders the sweep as CSV text: one row per (δ, variant, source), header
/// `delta,variant,source,d_star,method,clamped,threshold_flag`, floats with
/// 10 decimal digits, trailing newline. Output is a pure function of the
/// spec, so identical runs are byte-identical.
pub fn render_sweep(spec: &SweepSpec) -> Result<String> {
    spec.validate()?;
    let mut out = String::from("delta,variant,source,d_star,method,clamped,threshold_flag\n");
    for delta in spec.grid() {
        for &variant in &spec.variants {
            for &source in &spec.sources {
                let point = d_star_numeric(variant, DiscountFactor::new(delta)?, Some(source))?;
                let threshold = threshold_delta::<f64>(variant, Some(source))?;
                writeln!(
                    out,
                    "{delta:.10},{},{},{:.10},numeric_root,{},{}",
                    variant_label(variant),
                    source_label(source),
                    point.d_star.get(),
                    point.clamped,
                    delta >= threshold,
                )
                .expect("writing to a string cannot fail");
            }
        }
    }
    Ok(out)
}

pub fn write_file(path: &Path, contents: &str) -> Result<()> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            fs::create_dir_all(parent).map_err(|source| Error::Io {
                path: parent.display().to_string(),
                source,
            })?;
        }
    }
    fs::write(path, contents).map_err(|source| Error::Io {
        path: path.display().to_string(),
        source,
    })
}

pub fn run_sweep(spec: &SweepSpec, out: &Path) -> Result<()> {
    let csv = render_sweep(spec)?;
    write_file(out, &csv)
}

fn figure_grid() -> Vec<f64> {
    // [0.5, 0.99] in steps of 0.01; hits the 0.6 and 0.7 checkpoint rows.
    (0..=49).map(|i| 0.5 + 0.01 * i as f64).collect()
}

fn solve(variant: Variant, delta: f64, source: ClosedFormSource) -> Result<f64> {
    Ok(d_star_numeric(variant, DiscountFactor::new(delta)?, Some(source))?
        .d_star
        .get())
}

/// Reach-vs-discount data for the three infinite-punishment variants (the
/// bad-opponent one under both closed-form sources).
pub fn render_figure_variants() -> Result<String> {
    let printed = ClosedFormSource::AsPrinted;
    let faithful = ClosedFormSource::IntegrandFaithful;
    let mut out =
        String::from("delta,benchmark,nonnaive_g,nonnaive_b_printed,nonnaive_b_faithful\n");
    for delta in figure_grid() {
        writeln!(
            out,
            "{delta:.10},{:.10},{:.10},{:.10},{:.10}",
            solve(Variant::Benchmark, delta, printed)?,
            solve(Variant::NonNaiveG, delta, printed)?,
            solve(Variant::NonNaiveB, delta, printed)?,
            solve(Variant::NonNaiveB, delta, faithful)?,
        )
        .expect("writing to a string cannot fail");
    }
    Ok(out)
}

/// Reach-vs-discount data for the limited punishment schemes against the
/// benchmark; includes the δ = 0.6 checkpoint row.
pub fn render_figure_limited() -> Result<String> {
    let printed = ClosedFormSource::AsPrinted;
    let mut out = String::from("delta,benchmark,limited_k1,limited_k2,limited_k3\n");
    for delta in figure_grid() {
        writeln!(
            out,
            "{delta:.10},{:.10},{:.10},{:.10},{:.10}",
            solve(Variant::Benchmark, delta, printed)?,
            solve(Variant::limited(1)?, delta, printed)?,
            solve(Variant::limited(2)?, delta, printed)?,
            solve(Variant::limited(3)?, delta, printed)?,
        )
        .expect("writing to a string cannot fail");
    }
    Ok(out)
}

/// Writes `figure1.csv` (variant comparison) and `figure2.csv` (limited
/// punishment schemes) under `dir`.
pub fn emit_figures(dir: &Path) -> Result<()> {
    write_file(&dir.join("figure1.csv"), &render_figure_variants()?)?;
    write_file(&dir.join("figure2.csv"), &render_figure_limited()?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_grids() {
        let base = SweepSpec {
            variants: vec![Variant::Benchmark],
            sources: vec![ClosedFormSource::AsPrinted],
            delta_from: 0.5,
            delta_to: 0.8,
            steps: 4,
        };
        assert!(base.validate().is_ok());
        for bad in [
            SweepSpec { steps: 1, ..base.clone() },
            SweepSpec { delta_from: 0.8, delta_to: 0.5, ..base.clone() },
            SweepSpec { delta_to: 1.0, ..base.clone() },
            SweepSpec { variants: vec![], ..base.clone() },
        ] {
            assert!(bad.validate().is_err());
        }
    }

    #[test]
    fn benchmark_sweep_rows() {
        let spec = SweepSpec {
            variants: vec![Variant::Benchmark],
            sources: vec![ClosedFormSource::AsPrinted],
            delta_from: 0.5,
            delta_to: 0.8,
            steps: 4,
        };
        let csv = render_sweep(&spec).unwrap();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines.len(), 5);
        assert_eq!(lines[0], "delta,variant,source,d_star,method,clamped,threshold_flag");
        let d_stars: Vec<f64> = lines[1..]
            .iter()
            .map(|l| l.split(',').nth(3).unwrap().parse().unwrap())
            .collect();
        assert!((d_stars[0] - 0.0).abs() < 1e-9);
        assert!((d_stars[1] - 0.3819660113).abs() < 1e-8);
        assert!((d_stars[2] - 0.7680749453).abs() < 1e-8);
        assert!((d_stars[3] - 1.0).abs() < 1e-9);
        assert!(csv.ends_with('\n'));
    }

    #[test]
    fn trivial_grid_is_all_zero() {
        let spec = SweepSpec {
            variants: vec![Variant::Benchmark],
            sources: vec![ClosedFormSource::AsPrinted],
            delta_from: 0.0,
            delta_to: 0.4,
            steps: 2,
        };
        let csv = render_sweep(&spec).unwrap();
        for line in csv.lines().skip(1) {
            let d: f64 = line.split(',').nth(3).unwrap().parse().unwrap();
            assert_eq!(d, 0.0);
            assert!(line.ends_with(",false"));
        }
    }

    #[test]
    fn sweep_is_deterministic() {
        let spec = SweepSpec {
            variants: vec![
                Variant::Benchmark,
                Variant::NonNaiveG,
                Variant::NonNaiveB,
                Variant::limited(2).unwrap(),
            ],
            sources: vec![
                ClosedFormSource::AsPrinted,
                ClosedFormSource::IntegrandFaithful,
            ],
            delta_from: 0.5,
            delta_to: 0.9,
            steps: 9,
        };
        assert_eq!(render_sweep(&spec).unwrap(), render_sweep(&spec).unwrap());
    }

    #[test]
    fn figure_checkpoint_rows() {
        let fig2 = render_figure_limited().unwrap();
        let row07 = fig2
            .lines()
            .find(|l| l.starts_with("0.7000000000"))
            .unwrap();
        let vals: Vec<f64> = row07.split(',').skip(1).map(|v| v.parse().unwrap()).collect();
        assert!((vals[0] - 0.7680749453).abs() < 1e-8);
        assert!((vals[1] - 0.1692076032).abs() < 1e-8);
        assert!((vals[2] - 0.4013885298).abs() < 1e-8);
        assert!((vals[3] - 0.5294579099).abs() < 1e-8);

        let row06 = fig2
            .lines()
            .find(|l| l.starts_with("0.6000000000"))
            .unwrap();
        let vals: Vec<f64> = row06.split(',').skip(1).map(|v| v.parse().unwrap()).collect();
        assert!((vals[0] - 0.3819660113).abs() < 1e-8);
        assert_eq!(vals[1], 0.0);
        assert!((vals[2] - 0.1579790).abs() < 1e-6);
        assert!((vals[3] - 0.2558963).abs() < 1e-6);

        let fig1 = render_figure_variants().unwrap();
        let row075 = fig1
            .lines()
            .find(|l| l.starts_with("0.7500000000"))
            .unwrap();
        let vals: Vec<f64> = row075.split(',').skip(1).map(|v| v.parse().unwrap()).collect();
        assert!((vals[0] - 1.0).abs() < 1e-9);
        assert!((vals[1] - 1.0).abs() < 1e-9);
    }
}
