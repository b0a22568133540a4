//! Command-line driver. Every report carries the resolved configuration and
//! the crate version; stochastic commands are pure functions of the config.

use std::ffi::OsString;
use std::f64::consts::E;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};

use crate::bodies::{make_euclid_ball, make_half_ball, make_lp_ball, HullBodyParams};
use crate::error::{Error, Result};
use crate::moments::{centroid_ratio_sequence, hull_centroid_limit, minkowski_volume, mixed_volume_table};
use crate::profile::{
    band_check, centroid_from_profile, concentration_from_profile, polar_centroid_height, section_profile,
    separation_report, window_constants, window_grid, CentroidOptions, Progress, TARGET_HI, TARGET_LO,
};
use crate::report::{to_csv, to_json, to_value};
use crate::santalo::{
    half_ball_gamma, half_ball_row, santalo_axis_search, santalo_grid_2d, SantaloOptions, RESIDUAL_THRESHOLD,
};
use crate::specfun::{euclid_ball_root_bounds, lp_ball_log_volume, Exponent};
use crate::stream::RandomStream;
use crate::volmc::{intersect_fraction, intersect_volume, RadialSampling};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Default seed.
pub const DEFAULT_SEED: u64 = 20240001;

/// Half-width of the acceptance band around `[s0, s1]` for the measured centroid.
pub const WINDOW_SLACK: f64 = 0.06;

/// Offset from the window used by the section band checks.
pub const BAND_OFFSET: f64 = 0.05;

/// Heights per side in the section band checks.
pub const BAND_POINTS: usize = 5;

// Linear volumes are only printed in low dimension, where they are representable.
const LINEAR_MAX_DIM: usize = 30;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct GlobalOpts {
    /// Dimension n of the body (the hull lives in n+1).
    #[arg(long, global = true, default_value_t = 200)]
    pub dim: usize,
    /// Depth of the ball face below the hyperplane.
    #[arg(long, global = true, default_value_t = 1.0, allow_negative_numbers = true)]
    pub a: f64,
    /// Height of the cube face; defaults to 1/(e−1).
    #[arg(long, global = true, default_value_t = 1.0 / (E - 1.0), allow_negative_numbers = true)]
    pub b: f64,
    /// Monte-Carlo samples per estimate.
    #[arg(long, global = true, default_value_t = 100_000)]
    pub samples: usize,
    /// Heights in the section grid.
    #[arg(long, global = true, default_value_t = 64)]
    pub grid_points: usize,
    #[arg(long, global = true, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    /// Mass threshold for the concentration checks.
    #[arg(long, global = true, default_value_t = 0.05)]
    pub gamma: f64,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// Write the report here instead of standard output.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum BodyKind {
    HalfBall,
    L1Ball,
    L2Ball,
    LinfBall,
    ShiftedBall,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SearchKind {
    Axis,
    Grid,
}

#[derive(Debug, Clone, Subcommand, Serialize)]
#[serde(rename_all = "kebab-case", tag = "name")]
pub enum Command {
    /// ln vol(B_p^n), with the Stirling sandwich for p = 2.
    BallVolume {
        /// Exponent p ≥ 1, or `inf`.
        #[arg(long, default_value = "2", value_parser = parse_exponent)]
        #[serde(serialize_with = "ser_exponent")]
        p: Exponent,
    },
    /// Mixed volumes of the ball and the cube and vol(B_2^n + t B_∞^n).
    MixedVolume {
        #[arg(long, default_value_t = 1.0)]
        t: f64,
    },
    /// Centroid height of the ball-cube hull and its limit.
    CentroidHull,
    /// vol(B_p^n ∩ s B_q^n) by Monte Carlo.
    Intersect {
        #[arg(long, default_value = "2", value_parser = parse_exponent)]
        #[serde(serialize_with = "ser_exponent")]
        p: Exponent,
        #[arg(long, default_value = "1", value_parser = parse_exponent)]
        #[serde(serialize_with = "ser_exponent")]
        q: Exponent,
        #[arg(long, default_value_t = 1.0)]
        s: f64,
    },
    /// Section volumes of the polar hull on the window grid.
    Sections,
    /// Centroid height of the polar hull and the separation ratios.
    PolarCentroid,
    /// Santaló point of a body.
    Santalo {
        #[arg(long, value_enum, default_value_t = BodyKind::HalfBall)]
        body: BodyKind,
        /// Centre offset along e1 for `shifted-ball`.
        #[arg(long, default_value_t = 0.3)]
        lambda: f64,
        #[arg(long, value_enum, default_value_t = SearchKind::Axis)]
        search: SearchKind,
        #[arg(long, default_value_t = crate::santalo::DEFAULT_TOLERANCE)]
        tolerance: f64,
        /// Grid spacing for `--search grid`.
        #[arg(long, default_value_t = 0.01)]
        step: f64,
    },
    /// Centroid and Santaló point of the half ball over several dimensions.
    HalfBall {
        #[arg(long, value_delimiter = ',', default_value = "4,16,64,256")]
        dims: Vec<usize>,
    },
    /// Window constants, measured separation and concentration checks.
    Reproduce,
}

#[derive(Debug, Clone, Parser)]
#[command(name = "santalo-lab", version, about = "Centroid versus Santaló point of the polar ball-cube hull")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub global: GlobalOpts,
}

fn parse_exponent(s: &str) -> std::result::Result<Exponent, String> {
    match s.trim().to_ascii_lowercase().as_str() {
        "inf" | "infinity" | "∞" => Ok(Exponent::Infinity),
        t => {
            let p: f64 = t.parse().map_err(|_| format!("`{s}` is not a number or `inf`"))?;
            Exponent::new(p).map_err(|e| e.to_string())
        }
    }
}

#[derive(Debug, Clone, Serialize)]
struct ResolvedConfig<'a> {
    command: &'a Command,
    #[serde(flatten)]
    global: &'a GlobalOpts,
}

fn progress_printer(label: &'static str) -> impl Fn(usize, usize) + Sync {
    move |done, total| eprintln!("{label}: {done}/{total}")
}

fn exponent_value(p: Exponent) -> Value {
    match p {
        Exponent::Finite(x) => Value::from(x),
        Exponent::Infinity => Value::from("inf"),
    }
}

fn ser_exponent<S: serde::Serializer>(p: &Exponent, s: S) -> std::result::Result<S::Ok, S::Error> {
    exponent_value(*p).serialize(s)
}

fn check(name: &str, pass: bool, detail: String) -> Value {
    json!({ "name": name, "pass": pass, "detail": detail })
}

fn hull(g: &GlobalOpts) -> Result<HullBodyParams> {
    HullBodyParams::new(g.dim, g.a, g.b)
}

fn ball_volume(g: &GlobalOpts, p: Exponent) -> Result<Value> {
    let lv = lp_ball_log_volume(p, g.dim)?;
    let mut out = json!({
        "n": g.dim,
        "p": exponent_value(p),
        "log_volume": lv.ln(),
        "volume": if g.dim <= LINEAR_MAX_DIM { Value::from(lv.exp()) } else { Value::Null },
        "root": (lv.ln() / g.dim as f64).exp(),
    });
    if p == Exponent::TWO && g.dim >= 3 {
        let (lo, hi) = euclid_ball_root_bounds(g.dim)?;
        out["root_bounds"] = json!({ "lower": lo, "upper": hi });
    }
    Ok(out)
}

fn mixed_volume(g: &GlobalOpts, t: f64) -> Result<Value> {
    let table = mixed_volume_table(g.dim)?;
    let logs: Vec<f64> = table.entries.iter().map(|v| v.ln()).collect();
    Ok(json!({
        "n": g.dim,
        "log_mixed_volumes": logs,
        "t": t,
        "log_minkowski_volume": minkowski_volume(g.dim, t)?.ln(),
    }))
}

fn centroid_hull(g: &GlobalOpts) -> Result<Value> {
    let ratio = centroid_ratio_sequence(g.dim)?;
    let limit = 1.0 - 1.0 / E;
    Ok(json!({
        "n": g.dim,
        "centroid_ratio": ratio,
        "one_minus_inv_e": limit,
        "limit_gap": (ratio - limit).abs(),
        "hull_centroid": -g.a + (g.a + g.b) * ratio,
        "hull_centroid_limit": hull_centroid_limit(g.a, g.b)?,
    }))
}

fn intersect(g: &GlobalOpts, p: Exponent, q: Exponent, s: f64) -> Result<Value> {
    let stream = RandomStream::new(g.seed, 0);
    let vol = intersect_volume(p, q, g.dim, s, g.samples, &stream)?;
    let frac = intersect_fraction(p, q, g.dim, s, g.samples, RadialSampling::Plain, &stream)?;
    Ok(json!({
        "n": g.dim,
        "p": exponent_value(p),
        "q": exponent_value(q),
        "s": s,
        "fraction": frac.value,
        "fraction_std_err": frac.std_err,
        "log_volume": vol.log_value.ln(),
        "std_err_log": vol.std_err_log,
        "volume": if g.dim <= LINEAR_MAX_DIM { Value::from(vol.value()) } else { Value::Null },
        "samples": vol.samples,
        "method": vol.method,
    }))
}

fn sections(g: &GlobalOpts) -> Result<Value> {
    let params = hull(g)?;
    let grid = window_grid(&params, CentroidOptions::default().delta, g.grid_points)?;
    let report = progress_printer("sections");
    let prof = section_profile(&params, &grid, g.samples, &RandomStream::new(g.seed, 0), Some(&report))?;
    let points: Vec<Value> = (0..prof.s_grid.len())
        .map(|i| {
            json!({
                "s": prof.s_grid[i],
                "log_volume": prof.log_vols[i].log_value.ln(),
                "std_err_log": prof.log_vols[i].std_err_log,
                "method": prof.log_vols[i].method,
                "log_envelope": prof.envelope[i].ln(),
                "factorization": prof.factorization[i],
            })
        })
        .collect();
    Ok(json!({ "n": g.dim, "a": g.a, "b": g.b, "points": points }))
}

fn polar_centroid(g: &GlobalOpts) -> Result<Value> {
    let params = hull(g)?;
    let opts = CentroidOptions { grid_points: g.grid_points, samples: g.samples, ..Default::default() };
    let report = progress_printer("polar-centroid");
    let c = polar_centroid_height(&params, &opts, &RandomStream::new(g.seed, 0), Some(&report))?;
    let sep = separation_report(&params, &c)?;
    Ok(json!({
        "height": c.height,
        "err": c.err,
        "mc_err": c.mc_err,
        "quadrature_err": c.quadrature_err,
        "tail_bias": c.tail_bias,
        "tail_fraction": c.tail_fraction,
        "window": c.window,
        "separation": to_value(&sep),
    }))
}

fn santalo(g: &GlobalOpts, body: BodyKind, lambda: f64, search: SearchKind, tolerance: f64, step: f64) -> Result<Value> {
    let n = g.dim;
    let k = match body {
        BodyKind::HalfBall => make_half_ball(n)?,
        BodyKind::L1Ball => make_lp_ball(Exponent::ONE, n, 1.0)?,
        BodyKind::L2Ball => make_lp_ball(Exponent::TWO, n, 1.0)?,
        BodyKind::LinfBall => make_lp_ball(Exponent::Infinity, n, 1.0)?,
        BodyKind::ShiftedBall => {
            let mut c = vec![0.0; n];
            c[0] = lambda;
            make_euclid_ball(&c, 1.0)?
        }
    };
    let opts = SantaloOptions {
        tolerance,
        angular_samples: g.samples,
        verify_samples: g.samples,
        ..Default::default()
    };
    let stream = RandomStream::new(g.seed, 0);
    let rep = match search {
        SearchKind::Axis => santalo_axis_search(&k, &opts, &stream)?,
        SearchKind::Grid => santalo_grid_2d(&k, step, 4096, &opts, &stream)?,
    };
    Ok(json!({
        "body": body,
        "n": n,
        "report": to_value(&rep),
        "residual_threshold": RESIDUAL_THRESHOLD,
        "residual_ok": rep.residual < RESIDUAL_THRESHOLD,
    }))
}

fn half_ball(g: &GlobalOpts, dims: &[usize]) -> Result<Value> {
    if dims.is_empty() {
        return Err(Error::Domain("need at least one dimension".into()));
    }
    let opts = SantaloOptions { angular_samples: g.samples, verify_samples: g.samples, ..Default::default() };
    let stream = RandomStream::new(g.seed, 0);
    let mut rows = Vec::with_capacity(dims.len());
    for (i, &n) in dims.iter().enumerate() {
        rows.push(half_ball_row(n, &opts, &stream.substream(i as u64))?);
        eprintln!("half-ball: {}/{}", i + 1, dims.len());
    }
    let smallest = rows.iter().min_by_key(|r| r.n).expect("non-empty");
    let fitted = smallest.scaled_santalo;
    let explicit = half_ball_gamma();
    let lo = rows.iter().map(|r| r.scaled_gap).fold(f64::INFINITY, f64::min);
    let hi = rows.iter().map(|r| r.scaled_gap).fold(f64::NEG_INFINITY, f64::max);
    Ok(json!({
        "rows": to_value(&rows),
        "gamma_fitted": fitted,
        "gamma_fitted_at": smallest.n,
        "gamma_fitted_dominates": rows.iter().all(|r| r.scaled_santalo <= fitted),
        "gamma_explicit": explicit,
        "gamma_explicit_dominates": rows.iter().all(|r| r.scaled_santalo <= explicit),
        "scaled_gap_range": [lo, hi],
    }))
}

fn reproduce(g: &GlobalOpts) -> Result<Value> {
    let params = hull(g)?;
    let wc = window_constants(g.a, g.b)?;
    let omie = 1.0 - 1.0 / E;
    let root = RandomStream::new(g.seed, 0);
    let opts = CentroidOptions { grid_points: g.grid_points, samples: g.samples, ..Default::default() };
    let grid = window_grid(&params, opts.delta, opts.grid_points)?;
    let report = progress_printer("reproduce");
    let progress: Progress = &report;
    let prof = section_profile(&params, &grid, opts.samples, &root.substream(0), Some(progress))?;
    let conc = concentration_from_profile(&prof, g.gamma)?;
    let c = centroid_from_profile(prof)?;
    let sep = separation_report(&params, &c)?;
    let (upper, lower) = band_check(&params, BAND_OFFSET, BAND_POINTS, g.samples, &root.substream(1))?;

    let lo = wc.s0 - WINDOW_SLACK;
    let hi = wc.s1 + WINDOW_SLACK;
    let in_window = c.height >= lo && c.height <= hi;
    let hull_height = g.a + g.b;
    let band = [(-hi).max(0.0) / hull_height, -lo / hull_height];
    let ratio = sep.ratio_over_hull_height;
    let band_ok = ratio >= band[0] && ratio <= band[1] && band[0] <= TARGET_LO && band[1] >= TARGET_HI;
    let fmt_band = |pts: &[crate::profile::BandPoint]| {
        pts.iter()
            .map(|b| format!("s={:.4}: {:.4}±{:.4}", b.s, b.fraction.value, b.fraction.std_err))
            .collect::<Vec<_>>()
            .join("; ")
    };
    let mut checks = Vec::new();
    if (g.a, g.b) == (1.0, 1.0 / (E - 1.0)) {
        checks.push(check(
            "window-constants",
            (wc.s0 + 0.290815).abs() < 5e-7 && (wc.s1 + 0.225705).abs() < 5e-7,
            format!("s0={:.6} s1={:.6}", wc.s0, wc.s1),
        ));
    }
    checks.extend([
        check(
            "centroid-in-window",
            in_window,
            format!("height {:.6} ± {:.2e} in [{lo:.6}, {hi:.6}]", c.height, c.err),
        ),
        check(
            "ratio-band-contains-target",
            band_ok,
            format!(
                "ratio over hull height {ratio:.6} in [{:.6}, {:.6}] which must contain [{TARGET_LO}, {TARGET_HI}]",
                band[0], band[1]
            ),
        ),
        check(
            "ratio-in-target",
            ratio >= TARGET_LO - c.err / hull_height && ratio <= TARGET_HI + c.err / hull_height,
            format!("{ratio:.6} vs [{TARGET_LO}, {TARGET_HI}]"),
        ),
        check(
            "concentration-total-mass",
            conc.total_within,
            format!("mass outside [{:.6}, {:.6}] over window mass = {:.3e} ≤ {}", conc.window[0], conc.window[1], conc.tail_fraction, g.gamma),
        ),
        check(
            "concentration-left-moment",
            conc.left_tail_small,
            format!("{:.3e} ≤ {}", conc.left_moment_fraction, g.gamma),
        ),
        check(
            "concentration-right-moment",
            conc.right_tail_small,
            format!("{:.3e} ≤ {}", conc.right_moment_fraction, g.gamma),
        ),
        check("ball-fraction-above-window", upper.iter().all(|b| b.pass), fmt_band(&upper)),
        check("cross-fraction-below-window", lower.iter().all(|b| b.pass), fmt_band(&lower)),
    ]);
    Ok(json!({
        "constants": {
            "s0": wc.s0,
            "s1": wc.s1,
            "one_minus_inv_e": omie,
            "target_lo": TARGET_LO,
            "target_hi": TARGET_HI,
        },
        "measured": {
            "polar_centroid_height": c.height,
            "err": c.err,
            "ratio_over_polar_chord": sep.ratio_over_polar_chord,
            "ratio_over_hull_height": sep.ratio_over_hull_height,
            "tail_fraction": c.tail_fraction,
            "normalization_note": sep.normalization_note,
        },
        "checks": checks,
    }))
}

fn execute(cli: &Cli) -> Result<Value> {
    let g = &cli.global;
    if g.dim == 0 {
        return Err(Error::Domain("--dim must be at least 1".into()));
    }
    match &cli.command {
        Command::BallVolume { p } => ball_volume(g, *p),
        Command::MixedVolume { t } => mixed_volume(g, *t),
        Command::CentroidHull => centroid_hull(g),
        Command::Intersect { p, q, s } => intersect(g, *p, *q, *s),
        Command::Sections => sections(g),
        Command::PolarCentroid => polar_centroid(g),
        Command::Santalo { body, lambda, search, tolerance, step } => {
            santalo(g, *body, *lambda, *search, *tolerance, *step)
        }
        Command::HalfBall { dims } => half_ball(g, dims),
        Command::Reproduce => reproduce(g),
    }
}

fn wrap(cli: &Cli, body: std::result::Result<Value, Value>) -> Value {
    let config = to_value(&ResolvedConfig { command: &cli.command, global: &cli.global });
    let mut out = json!({ "version": VERSION, "config": config });
    match body {
        Ok(Value::Object(map)) => out.as_object_mut().expect("object").extend(map),
        Ok(other) => out["result"] = other,
        Err(e) => out["error"] = e,
    }
    out
}

fn render(format: Format, value: &Value) -> String {
    match format {
        Format::Json => to_json(value),
        Format::Csv => to_csv(value),
    }
}

/// Runs the CLI on `args` (including the program name) and returns the exit
/// code: 0 on success, 1 on a numeric failure, 2 on a usage error.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    crate::stream::configure_threads_from_env();
    let (doc, code) = match execute(&cli) {
        Ok(v) => (wrap(&cli, Ok(v)), 0),
        Err(e) => (wrap(&cli, Err(json!({ "kind": e.kind(), "message": e.to_string() }))), 1),
    };
    let text = render(cli.global.format, &doc);
    let written = match (&cli.global.out, code) {
        (Some(path), 0) => std::fs::write(path, text),
        _ => std::io::stdout().write_all(text.as_bytes()),
    };
    if let Err(e) = written {
        eprintln!("santalo-lab: cannot write report: {e}");
        return 1;
    }
    code
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(args: &[&str]) -> Cli {
        Cli::try_parse_from(std::iter::once("santalo-lab").chain(args.iter().copied())).unwrap()
    }

    #[test]
    fn defaults_resolve() {
        let cli = parse(&["reproduce"]);
        let g = &cli.global;
        assert_eq!((g.dim, g.samples, g.grid_points, g.seed), (200, 100_000, 64, 20240001));
        assert_eq!((g.a, g.gamma, g.format), (1.0, 0.05, Format::Json));
        assert!((g.b - 1.0 / (E - 1.0)).abs() < 1e-15);
        let v = wrap(&cli, Ok(json!({})));
        assert_eq!(v["config"]["command"]["name"], "reproduce");
        assert_eq!(v["config"]["dim"], 200);
        assert_eq!(v["version"], VERSION);
    }

    #[test]
    fn exponents_parse() {
        assert_eq!(parse_exponent("inf").unwrap(), Exponent::Infinity);
        assert_eq!(parse_exponent("1.5").unwrap(), Exponent::Finite(1.5));
        assert!(parse_exponent("0.5").is_err());
        assert!(parse_exponent("x").is_err());
    }

    #[test]
    fn usage_errors() {
        assert!(Cli::try_parse_from(["santalo-lab", "reproduce", "--format", "xml"]).is_err());
        assert!(Cli::try_parse_from(["santalo-lab", "bogus"]).is_err());
        assert!(Cli::try_parse_from(["santalo-lab", "ball-volume", "--dim", "-3"]).is_err());
    }

    #[test]
    fn ball_volume_plane() {
        let cli = parse(&["ball-volume", "--dim", "2"]);
        let v = execute(&cli).unwrap();
        assert!((v["volume"].as_f64().unwrap() / std::f64::consts::PI - 1.0).abs() < 1e-12);
        let cli = parse(&["ball-volume", "--dim", "10", "--p", "2"]);
        let v = execute(&cli).unwrap();
        let r = v["root"].as_f64().unwrap();
        assert!(v["root_bounds"]["lower"].as_f64().unwrap() <= r && r <= v["root_bounds"]["upper"].as_f64().unwrap());
    }

    #[test]
    fn centroid_hull_gap() {
        let v = execute(&parse(&["centroid-hull", "--dim", "2000"])).unwrap();
        assert!(v["limit_gap"].as_f64().unwrap() < 0.01);
        assert!(matches!(execute(&parse(&["centroid-hull", "--dim", "0"])), Err(Error::Domain(_))));
    }
}
