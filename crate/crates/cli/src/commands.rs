//! Subcommand implementations.

use crate::output::{emit, emit_or_print, fmt_f64, Format};
use crate::parse::{
    parse_delta, parse_grid, parse_matrix, parse_points, parse_real, parse_shape,
};
use crate::{domain, usage, Failure};
use anyhow::{anyhow, Context};
use divflow::constructions::{
    build_schedule, construction_i, construction_ii, lemma_key_solve, verify_construction_i,
    verify_construction_ii, KeyFunction, Mode, PiecewiseConstant, Schedule,
};
use divflow::exact::{format_rat, parse_rat, rat_int, to_f64, Rat};
use divflow::latflow::{
    cusp_occupation, dimension_report, flowed_basis, h_trajectory, occupation_joint, scan_q,
    successive_minima, MatrixTuple, SystemShape,
};
use divflow::templates::{
    average_contraction, lower_average_estimate, standard_template_seq, validate_template,
    Template,
};
use serde::Deserialize;
use std::path::Path;

pub struct Ctx {
    pub out: Option<std::path::PathBuf>,
    pub format: Format,
    pub seed: u64,
    pub budget: u64,
}

type CmdResult = Result<(), Failure>;

// ---- dim ---------------------------------------------------------------

pub fn dim(ctx: &Ctx, pairs: &[String], delta: &str) -> CmdResult {
    let shape = parse_shape(pairs, None).map_err(usage)?;
    let delta = parse_delta(delta).map_err(usage)?;
    let report = dimension_report(&shape, &delta);
    println!("pairs: {:?}  delta = {}", report.pairs, format_rat(&report.delta));
    println!("dim M (matrix space)       = {}", format_rat(&report.dim_matrix_space));
    println!("dim X (homogeneous space)  = {}", format_rat(&report.dim_homogeneous_space));
    let b: Vec<String> = report.b.iter().map(format_rat).collect();
    println!("b_i = [{}]  min = {}", b.join(", "), format_rat(&report.min_b));
    println!("dim D = dim D^e (matrix)         = {}", format_rat(&report.dim_d_matrix));
    println!("dim D_delta = dim D^e_delta      = {}", format_rat(&report.dim_d_delta_matrix));
    println!("dim D (homogeneous)              = {}", format_rat(&report.dim_d_homogeneous));
    println!("dim D_delta (homogeneous)        = {}", format_rat(&report.dim_d_delta_homogeneous));
    let sing: Vec<String> = report.sing_dims.iter().map(format_rat).collect();
    println!("per-factor Sing dimensions = [{}]", sing.join(", "));
    if let Some(out) = &ctx.out {
        let artifact = match ctx.format {
            Format::Json => emit(
                out,
                "dim.json",
                &serde_json::to_string_pretty(&report).expect("report serializes"),
            ),
            Format::Csv => {
                let mut csv = String::from("field,value\n");
                csv.push_str(&format!("dim_matrix_space,{}\n", format_rat(&report.dim_matrix_space)));
                csv.push_str(&format!(
                    "dim_homogeneous_space,{}\n",
                    format_rat(&report.dim_homogeneous_space)
                ));
                csv.push_str(&format!("min_b,{}\n", format_rat(&report.min_b)));
                csv.push_str(&format!("dim_d_matrix,{}\n", format_rat(&report.dim_d_matrix)));
                csv.push_str(&format!(
                    "dim_d_delta_matrix,{}\n",
                    format_rat(&report.dim_d_delta_matrix)
                ));
                csv.push_str(&format!(
                    "dim_d_homogeneous,{}\n",
                    format_rat(&report.dim_d_homogeneous)
                ));
                csv.push_str(&format!(
                    "dim_d_delta_homogeneous,{}\n",
                    format_rat(&report.dim_d_delta_homogeneous)
                ));
                emit(out, "dim.csv", &csv)
            }
        };
        let path = artifact.map_err(domain)?;
        println!("wrote {}", path.display());
    }
    Ok(())
}

// ---- template ----------------------------------------------------------

fn load_template(path: &Path) -> Result<Template, Failure> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("reading {}", path.display()))
        .map_err(usage)?;
    Template::from_json(&text).map_err(usage)
}

pub fn template_validate(_ctx: &Ctx, input: &Path) -> CmdResult {
    let template = load_template(input)?;
    let report = validate_template(&template);
    if report.is_valid() {
        println!("valid");
        Ok(())
    } else {
        println!("{report}");
        Err(domain(anyhow!(
            "{} violation(s) found",
            report.violations.len()
        )))
    }
}

pub fn template_standard(ctx: &Ctx, m: usize, n: usize, points: &str) -> CmdResult {
    let points = parse_points(points).map_err(usage)?;
    let template = standard_template_seq(&points, m, n).map_err(domain)?;
    let report = validate_template(&template);
    emit_or_print(ctx.out.as_deref(), "template.json", &template.to_json()).map_err(domain)?;
    if report.is_valid() {
        Ok(())
    } else {
        eprintln!("{report}");
        Err(domain(anyhow!(
            "constructed template fails validation with {} violation(s)",
            report.violations.len()
        )))
    }
}

pub fn template_rate(
    ctx: &Ctx,
    input: &Path,
    window: Option<&str>,
    lower_horizon: Option<f64>,
    tail_fraction: f64,
) -> CmdResult {
    let template = load_template(input)?;
    let (d0, d1) = template.domain();
    let (a, b) = match window {
        Some(w) => {
            let (a, b) = w
                .split_once(',')
                .ok_or_else(|| usage(anyhow!("window must look like a,b")))?;
            (
                parse_real(a).map_err(usage)?,
                parse_real(b).map_err(usage)?,
            )
        }
        None => (d0, d1),
    };
    let avg = average_contraction(&template, a, b).map_err(domain)?;
    println!(
        "average contraction rate over [{}, {}] = {} (= {})",
        fmt_f64(a),
        fmt_f64(b),
        fmt_f64(to_f64(&avg)),
        format_rat(&avg)
    );
    if let Some(horizon) = lower_horizon {
        let est = lower_average_estimate(&template, horizon, tail_fraction).map_err(domain)?;
        println!(
            "lower-average probe min over [{}T, T] = {} (= {}) at T' = {}",
            tail_fraction,
            fmt_f64(to_f64(&est.value)),
            format_rat(&est.value),
            fmt_f64(est.at)
        );
        println!("probe grid size: {}", est.grid.len());
    }
    let _ = ctx;
    Ok(())
}

// ---- construct ----------------------------------------------------------

#[allow(clippy::too_many_arguments)]
pub fn construct(
    ctx: &Ctx,
    mode: &str,
    pairs: &[String],
    weights: Option<&[String]>,
    deltas: Option<&[String]>,
    at: f64,
    windows: usize,
    band: f64,
    kmax: Option<usize>,
    emit_templates: bool,
) -> CmdResult {
    let shape = parse_shape(pairs, weights).map_err(usage)?;
    let mode = match mode {
        "I" | "i" | "1" => Mode::I,
        "II" | "ii" | "2" => {
            let deltas = deltas
                .ok_or_else(|| usage(anyhow!("mode II needs --deltas")))?
                .iter()
                .map(|d| parse_real(d))
                .collect::<Result<Vec<_>, _>>()
                .map_err(usage)?;
            Mode::II { deltas }
        }
        other => return Err(usage(anyhow!("unknown mode {other:?} (expected I or II)"))),
    };
    if windows == 0 {
        return Err(usage(anyhow!("need at least one window")));
    }
    if at > 2e12 {
        return Err(usage(anyhow!("target scale {at:e} beyond the supported horizon (~2e12)")));
    }

    let schedule = resolve_schedule(&shape, mode, at, windows, kmax)?;
    let k = schedule
        .k_at(at)
        .filter(|&k| k >= schedule.k0 && k + windows <= schedule.kmax + 1)
        .ok_or_else(|| {
            domain(anyhow!(
                "no valid window at T ≈ {at:e} within [k0 = {}, kmax = {}]",
                schedule.k0,
                schedule.kmax
            ))
        })?;
    let ks: Vec<usize> = (k..k + windows).collect();

    let (tuple, report) = match &schedule.mode {
        Mode::I => {
            let tuple =
                construction_i(&shape, &schedule, k, k + windows - 1).map_err(domain)?;
            let report = verify_construction_i(&tuple, &schedule, &ks).map_err(domain)?;
            (tuple, report)
        }
        Mode::II { .. } => {
            let tuple =
                construction_ii(&shape, &schedule, k, k + windows - 1).map_err(domain)?;
            let report =
                verify_construction_ii(&tuple, &schedule, &ks, band).map_err(domain)?;
            (tuple, report)
        }
    };

    println!(
        "construction {} on {:?} weights {:?}: k0 = {}, verifying k = {:?}",
        report.mode, shape.pairs, shape.weights, schedule.k0, ks
    );
    for w in &report.windows {
        println!(
            "k = {}  T_k = {}  gamma_k = {}  log gamma_k = {}",
            w.k,
            fmt_f64(w.t_k),
            fmt_f64(w.gamma_k),
            fmt_f64(w.log_gamma_k)
        );
        for f in &w.factors {
            println!(
                "  factor {}: delta = {} target = {} gap = {} (exact {})",
                f.factor + 1,
                fmt_f64(f.delta),
                fmt_f64(f.target),
                fmt_f64(f.gap),
                f.delta_exact
            );
        }
        println!(
            "  envelope max = {} bound = {} ok = {}",
            fmt_f64(w.envelope_max),
            fmt_f64(w.envelope_bound),
            w.envelope_ok
        );
        for witness in &w.witnesses {
            println!(
                "  witness {} at t = {}: value = {} exact zero = {}",
                witness.label,
                fmt_f64(witness.time),
                fmt_f64(witness.value),
                witness.exact_zero
            );
        }
        for bocc in &w.band_occupations {
            let label = match bocc.exclude {
                Some(j) => format!("excluding factor {}", j + 1),
                None => "all factors".into(),
            };
            println!(
                "  band occupation ({label}) = {} target = {} gap = {}",
                fmt_f64(bocc.measured),
                fmt_f64(bocc.target),
                fmt_f64(bocc.gap)
            );
        }
    }

    if let Some(out) = &ctx.out {
        let path = match ctx.format {
            Format::Json => emit(out, "report.json", &report.to_json()),
            Format::Csv => emit(out, "report.csv", &report.to_csv()),
        }
        .map_err(domain)?;
        println!("wrote {}", path.display());
        if emit_templates {
            for (i, t) in tuple.factors.iter().enumerate() {
                let path =
                    emit(out, &format!("factor-{}.json", i + 1), &t.to_json()).map_err(domain)?;
                println!("wrote {}", path.display());
            }
        }
    }
    Ok(())
}

/// Builds a schedule whose horizon covers the requested scale, growing
/// `kmax` when none was given.
fn resolve_schedule(
    shape: &SystemShape,
    mode: Mode,
    at: f64,
    windows: usize,
    kmax: Option<usize>,
) -> Result<Schedule, Failure> {
    if let Some(kmax) = kmax {
        return build_schedule(shape, kmax, mode).map_err(domain);
    }
    let mut kmax = 4096;
    loop {
        if let Ok(s) = build_schedule(shape, kmax, mode.clone()) {
            if let Some(k) = s.k_at(at) {
                if k >= s.k0 && k + windows <= s.kmax + 1 {
                    return Ok(s);
                }
            }
        }
        kmax *= 2;
        if kmax > (1 << 22) {
            return Err(domain(anyhow!(
                "no valid schedule reaches T ≈ {at:e} (validity or horizon fails)"
            )));
        }
    }
}

// ---- lattice -----------------------------------------------------------

pub fn lattice_minima(ctx: &Ctx, theta: &str, m: usize, n: usize, t: f64) -> CmdResult {
    let theta = parse_matrix(theta, m, n).map_err(usage)?;
    let basis = flowed_basis(&theta, m, n, t);
    let minima = successive_minima(&basis, ctx.budget).map_err(domain)?;
    println!("t = {}  d = {}", fmt_f64(t), m + n);
    for (k, (value, coeffs)) in minima.values.iter().zip(&minima.coefficients).enumerate() {
        println!(
            "lambda_{} = {}  h_{} = {}  coeffs = {:?}",
            k + 1,
            fmt_f64(*value),
            k + 1,
            fmt_f64(value.ln()),
            coeffs
        );
    }
    println!("nodes visited: {}", minima.nodes);
    Ok(())
}

pub fn lattice_traj(ctx: &Ctx, theta: &str, m: usize, n: usize, grid: &str) -> CmdResult {
    let theta = parse_matrix(theta, m, n).map_err(usage)?;
    let grid = parse_grid(grid).map_err(usage)?;
    let traj = h_trajectory(&theta, m, n, &grid, ctx.budget).map_err(domain)?;
    emit_or_print(ctx.out.as_deref(), "traj.csv", &traj.to_csv()).map_err(domain)?;
    Ok(())
}

pub fn lattice_scan(ctx: &Ctx, theta: &str, m: usize, n: usize, eps: f64, cap: f64) -> CmdResult {
    if eps <= 0.0 || cap < 1.0 {
        return Err(usage(anyhow!("need eps > 0 and Q >= 1")));
    }
    let theta = parse_matrix(theta, m, n).map_err(usage)?;
    match scan_q(&theta, eps, cap, ctx.budget).map_err(domain)? {
        Some(w) => println!(
            "witness: q = {:?} p = {:?}  |theta q - p| = {}  |q| = {}",
            w.q,
            w.p,
            fmt_f64(w.err_sup),
            fmt_f64(w.q_sup)
        ),
        None => println!("no witness"),
    }
    Ok(())
}

#[allow(clippy::too_many_arguments)]
pub fn lattice_occupy(
    ctx: &Ctx,
    theta: Option<&str>,
    thetas: Option<&str>,
    pairs: Option<&[String]>,
    weights: Option<&[String]>,
    m: usize,
    n: usize,
    r: Option<f64>,
    eps: Option<f64>,
    exclude: Option<usize>,
    horizon: f64,
    step: f64,
) -> CmdResult {
    if step <= 0.0 || step > 0.1 {
        return Err(usage(anyhow!("step must lie in (0, 0.1]")));
    }
    match (r, eps) {
        (Some(r), None) => {
            let theta = theta.ok_or_else(|| usage(anyhow!("cusp mode needs --theta")))?;
            if !(0.0..1.0).contains(&r) || r == 0.0 {
                return Err(usage(anyhow!("threshold r must lie in (0, 1)")));
            }
            let theta = parse_matrix(theta, m, n).map_err(usage)?;
            let occ =
                cusp_occupation(&theta, m, n, r, horizon, step, ctx.budget).map_err(domain)?;
            println!("cusp occupation (lambda_1 < {}) over [0, {}] = {}", r, horizon, fmt_f64(occ));
        }
        (None, Some(eps)) => {
            let pairs = pairs.ok_or_else(|| usage(anyhow!("joint mode needs --pairs")))?;
            let shape = parse_shape(pairs, weights).map_err(usage)?;
            let thetas = thetas.ok_or_else(|| usage(anyhow!("joint mode needs --thetas")))?;
            let parts: Vec<&str> = thetas.split('|').collect();
            if parts.len() != shape.s() {
                return Err(usage(anyhow!(
                    "{} matrices for {} factors",
                    parts.len(),
                    shape.s()
                )));
            }
            let mut entries = Vec::with_capacity(parts.len());
            for (i, part) in parts.iter().enumerate() {
                let (mi, ni) = shape.pairs[i];
                entries.push(parse_matrix(part, mi, ni).map_err(usage)?);
            }
            let tuple = MatrixTuple::new(entries, &shape).map_err(usage)?;
            let exclude = match exclude {
                Some(j) if j >= 1 && j <= shape.s() => Some(j - 1),
                Some(j) => {
                    return Err(usage(anyhow!(
                        "--exclude {j} out of range (1..={})",
                        shape.s()
                    )))
                }
                None => None,
            };
            let occ = occupation_joint(&tuple, &shape, eps, horizon, step, exclude, ctx.budget)
                .map_err(domain)?;
            match exclude {
                Some(j) => println!(
                    "joint witness occupation excluding factor {} over [0, {}] = {}",
                    j + 1,
                    horizon,
                    fmt_f64(occ)
                ),
                None => println!(
                    "joint witness occupation over [0, {}] = {}",
                    horizon,
                    fmt_f64(occ)
                ),
            }
        }
        _ => {
            return Err(usage(anyhow!(
                "occupy needs exactly one of --r (cusp proxy) or --eps (witness sets)"
            )))
        }
    }
    Ok(())
}

// ---- lemmakey ----------------------------------------------------------

#[derive(Deserialize)]
struct KeyInstanceJson {
    sigmas: Vec<String>,
    eps: String,
    t0: String,
    functions: Vec<KeyFunctionJson>,
}

#[derive(Deserialize)]
struct KeyFunctionJson {
    #[serde(default)]
    default: Option<String>,
    sup: String,
    #[serde(default)]
    pieces: Vec<(String, String, String)>,
}

fn rat_field(s: &str, what: &str) -> Result<Rat, Failure> {
    parse_rat(s).map_err(|e| usage(anyhow!("{what}: {e}")))
}

pub fn lemmakey(ctx: &Ctx, input: Option<&Path>, demo: Option<usize>) -> CmdResult {
    if let Some(count) = demo {
        return lemmakey_demo(ctx, count);
    }
    let path = input.expect("clap enforces input xor demo");
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("reading {}", path.display()))
        .map_err(usage)?;
    let spec: KeyInstanceJson = serde_json::from_str(&text)
        .map_err(|e| usage(anyhow!("parsing {}: {e}", path.display())))?;
    let sigmas = spec
        .sigmas
        .iter()
        .map(|s| rat_field(s, "sigma"))
        .collect::<Result<Vec<_>, _>>()?;
    let eps = rat_field(&spec.eps, "eps")?;
    let t0 = rat_field(&spec.t0, "t0")?;
    let mut funcs = Vec::with_capacity(spec.functions.len());
    for f in &spec.functions {
        let default = match &f.default {
            Some(d) => rat_field(d, "default")?,
            None => rat_int(0),
        };
        let sup = rat_field(&f.sup, "sup")?;
        let mut pieces = Vec::with_capacity(f.pieces.len());
        for (lo, hi, v) in &f.pieces {
            pieces.push((
                rat_field(lo, "piece lo")?,
                rat_field(hi, "piece hi")?,
                rat_field(v, "piece value")?,
            ));
        }
        funcs.push(PiecewiseConstant::new(default, pieces, sup));
    }
    if funcs.len() != sigmas.len() {
        return Err(usage(anyhow!(
            "{} functions for {} sigmas",
            funcs.len(),
            sigmas.len()
        )));
    }
    solve_and_print(&funcs, &sigmas, &eps, &t0)
}

fn solve_and_print(
    funcs: &[PiecewiseConstant],
    sigmas: &[Rat],
    eps: &Rat,
    t0: &Rat,
) -> CmdResult {
    let t = lemma_key_solve(funcs, sigmas, eps, t0).map_err(domain)?;
    let lhs: Rat = funcs.iter().map(|f| f.eval(&t)).sum();
    let rhs: Rat = eps.clone()
        + funcs
            .iter()
            .zip(sigmas)
            .map(|(f, s)| f.eval(&(s * &t)))
            .sum::<Rat>();
    println!("t = {} (= {})", format_rat(&t), fmt_f64(to_f64(&t)));
    println!(
        "verification: sum f_i(t) = {} <= eps + sum f_i(sigma_i t) = {} : {}",
        format_rat(&lhs),
        format_rat(&rhs),
        lhs <= rhs
    );
    if lhs <= rhs {
        Ok(())
    } else {
        Err(domain(anyhow!("solver returned a non-certifying t")))
    }
}

fn lemmakey_demo(ctx: &Ctx, count: usize) -> CmdResult {
    use rand::Rng;
    use rand::SeedableRng;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(ctx.seed);
    let ratio = |num: i64, den: i64| Rat::new(num.into(), den.into());
    for case in 0..count {
        let s = rng.gen_range(1..=4);
        let mut sigmas = vec![rat_int(1)];
        for _ in 1..s {
            let den = rng.gen_range(1..=5i64);
            let num = rng.gen_range(1..=den);
            let prev = sigmas.last().unwrap().clone();
            let cand = ratio(num, den);
            sigmas.push(if cand < prev { cand } else { prev });
        }
        let funcs: Vec<PiecewiseConstant> = (0..s)
            .map(|_| {
                let pieces = (0..rng.gen_range(0..4))
                    .map(|_| {
                        let lo = ratio(rng.gen_range(0..40), 2);
                        let len = ratio(rng.gen_range(1..10), 2);
                        let v = ratio(rng.gen_range(0..=4), 2);
                        (lo.clone(), lo + len, v)
                    })
                    .collect();
                PiecewiseConstant::with_true_sup(ratio(rng.gen_range(0..=2), 2), pieces)
            })
            .collect();
        let eps = ratio(rng.gen_range(1..=4), 4);
        let t0 = ratio(rng.gen_range(1..=40), 4);
        println!(
            "instance {case}: s = {s}, eps = {}, t0 = {}",
            format_rat(&eps),
            format_rat(&t0)
        );
        solve_and_print(&funcs, &sigmas, &eps, &t0)?;
    }
    Ok(())
}
