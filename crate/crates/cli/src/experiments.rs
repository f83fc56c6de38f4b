//! The nine experiment runners. Each reads the resolved flat parameter
//! table, emits one CSV plus one JSON manifest, and returns the process
//! exit code (0 = success, 2 = an assertion-style check failed).

use anyhow::{bail, Context, Result};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::json;

use rsf_core::calibration::sublevel_bound_constant;
use rsf_core::curve::{
    overlap_count, rho, standard_separated_set, CurveSpec, DecompositionSpec,
};
use rsf_core::field::{
    build_extremizer, default_sizes, l4_norm, square_function_norm, BlockDecomposition, Regime,
    SpectralField, WavePacketExtremizer,
};
use rsf_core::fit::{loglog_fit, FitResult, Ladder};
use rsf_core::quadruples::{count_bruteforce, count_fast, CountQuery};
use rsf_core::sublevel::{sublevel_bound_check, sublevel_set, SublevelQuery};
use rsf_core::torus::{
    norm_report, predicted_exponent, DataFamily, NormReport, TorusData,
};
use rsf_core::bilinear;

use crate::ladder::{parse_dyadic_ladder, parse_dyadic_ladder_usize, parse_int_list};
use crate::params::Params;
use crate::report::{fmt_f64, read_csv, Report};

const DEFAULT_OVERSAMPLE: usize = 2;
const DEFAULT_PROBE_GRID: usize = 48;

fn fit_json(fit: &FitResult) -> serde_json::Value {
    json!({
        "slope": fit.slope,
        "intercept": fit.intercept,
        "max_residual": fit.max_residual,
        "n": fit.n,
    })
}

pub fn run_rho(params: &Params) -> Result<i32> {
    let a = params.require_a()?;
    let b = params.require_b()?;
    let curve = CurveSpec::new(a)?;
    let value = rho(&curve, b);
    let mut rep = Report::new("rho", params, &["a", "b", "rho"]);
    rep.push_row(vec![fmt_f64(a), fmt_f64(b), fmt_f64(value)]);
    rep.set_summary(json!({ "rho": value }));
    rep.write(params)?;
    println!("{value}");
    Ok(0)
}

pub fn run_overlap(params: &Params) -> Result<i32> {
    let a = params.require_a()?;
    let b = params.require_b()?;
    let curve = CurveSpec::new(a)?;
    let deltas = parse_dyadic_ladder(params.require_delta()?)?;
    let mut rep =
        Report::new("overlap", params, &["delta", "m", "overlap", "rho_scale"]);
    for &delta in &deltas {
        let spec = DecompositionSpec::standard(delta, b)?;
        let omegas = standard_separated_set(&spec, (0.0, 1.0))?;
        let n = overlap_count(&omegas, &curve, &spec, DEFAULT_PROBE_GRID)?;
        let scale = delta.powf(-rho(&curve, b));
        println!("delta={delta:.6e} m={} overlap={n} rho_scale={scale:.3e}", omegas.len());
        rep.push_row(vec![
            fmt_f64(delta),
            omegas.len().to_string(),
            n.to_string(),
            fmt_f64(scale),
        ]);
    }
    rep.write(params)?;
    Ok(0)
}

pub fn run_sublevel(params: &Params) -> Result<i32> {
    let seed = params.require_seed()?;
    let count = params.count.unwrap_or(10_000);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rep = Report::new(
        "sublevel",
        params,
        &["a", "r", "c", "lambda", "measure", "bound", "intervals", "ok"],
    );
    let mut violations = 0u64;
    for _ in 0..count {
        let a = match params.a {
            Some(a) => a,
            None => {
                let mut a: f64 = rng.random_range(0.2..6.0);
                if (a - 1.0).abs() < 1e-3 {
                    a = 1.1;
                }
                a
            }
        };
        let r: f64 = rng.random_range(1e-3..1.0);
        let lambda: f64 = 2f64.powf(rng.random_range(-16.0..2.0));
        let span = 2.0 * r.powf(a).max((r / 2.0).powf(a));
        let c: f64 = rng.random_range(-span..2.0 * span);
        let q = SublevelQuery::new(a, r, c, lambda)?;
        let set = sublevel_set(&q);
        let constant = sublevel_bound_constant(a);
        let bound = constant * r * 1f64.min(lambda.sqrt() * r.powf(-a / 2.0));
        let ok = sublevel_bound_check(&q, constant) && set.intervals().len() <= 2;
        if !ok {
            violations += 1;
        }
        rep.push_row(vec![
            fmt_f64(a),
            fmt_f64(r),
            fmt_f64(c),
            fmt_f64(lambda),
            fmt_f64(set.measure()),
            fmt_f64(bound),
            set.intervals().len().to_string(),
            u64::from(ok).to_string(),
        ]);
    }
    rep.set_summary(json!({ "queries": count, "violations": violations }));
    rep.write(params)?;
    println!("sublevel audit: {count} queries, {violations} violations");
    Ok(if violations == 0 { 0 } else { 2 })
}

fn extremizer_ratio(
    curve: &CurveSpec,
    spec: &DecompositionSpec,
    oversample: usize,
) -> Result<(f64, f64)> {
    let regime = Regime::infer(curve, spec.b);
    let ext = WavePacketExtremizer::calibrated(regime, curve, spec)?;
    let (n1, n2) = default_sizes(spec);
    let (field, decomp) = build_extremizer(&ext, spec, curve, n1, n2)?;
    let l4 = l4_norm(&field.synthesize(oversample)?);
    let sq = square_function_norm(&field, &decomp, oversample)?;
    Ok((l4, sq))
}

fn random_field_ratio(
    curve: &CurveSpec,
    spec: &DecompositionSpec,
    oversample: usize,
    rng: &mut ChaCha8Rng,
) -> Result<(f64, f64)> {
    let (n1, n2) = default_sizes(spec);
    let field = SpectralField::random(*curve, spec, n1, n2, rng)?;
    let omegas = standard_separated_set(spec, (-1.0, 1.0))?;
    let decomp = BlockDecomposition::new(&field, omegas, spec);
    let l4 = l4_norm(&field.synthesize(oversample)?);
    let sq = square_function_norm(&field, &decomp, oversample)?;
    Ok((l4, sq))
}

pub fn run_ratio(params: &Params) -> Result<i32> {
    let a = params.require_a()?;
    let b = params.require_b()?;
    let curve = CurveSpec::new(a)?;
    let deltas = parse_dyadic_ladder(params.require_delta()?)?;
    let oversample = params.oversample.unwrap_or(DEFAULT_OVERSAMPLE);
    let random_fields = params.random_fields.unwrap_or(0);
    let mut rng = match random_fields {
        0 => ChaCha8Rng::seed_from_u64(0),
        _ => ChaCha8Rng::seed_from_u64(params.require_seed()?),
    };
    let mut rep = Report::new(
        "ratio",
        params,
        &["delta", "l4", "sqfn", "ratio", "kind", "index"],
    );
    let mut pts = Vec::new();
    for &delta in &deltas {
        let spec = DecompositionSpec::standard(delta, b)?;
        let (l4, sq) = extremizer_ratio(&curve, &spec, oversample)?;
        println!("delta={delta:.6e} extremizer ratio={:.6}", l4 / sq);
        pts.push((1.0 / delta, l4 / sq));
        rep.push_row(vec![
            fmt_f64(delta),
            fmt_f64(l4),
            fmt_f64(sq),
            fmt_f64(l4 / sq),
            "extremizer".into(),
            "0".into(),
        ]);
        for i in 0..random_fields {
            let (l4, sq) = random_field_ratio(&curve, &spec, oversample, &mut rng)?;
            rep.push_row(vec![
                fmt_f64(delta),
                fmt_f64(l4),
                fmt_f64(sq),
                fmt_f64(l4 / sq),
                "random".into(),
                (i + 1).to_string(),
            ]);
        }
    }
    let mut summary = json!({ "predicted_slope": rho(&curve, b) / 4.0 });
    if pts.len() >= 3 {
        let fit = loglog_fit(&Ladder::new(pts, "extremizer ratio vs 1/delta")?);
        println!("extremizer slope (ratio vs 1/delta) = {:.6}", fit.slope);
        summary["fit"] = fit_json(&fit);
    }
    rep.set_summary(summary);
    rep.write(params)?;
    Ok(0)
}

pub fn run_fit(params: &Params) -> Result<i32> {
    let input = params.input.as_deref().context("missing required parameter --input")?;
    let xcol = params.xcol.as_deref().context("missing required parameter --xcol")?;
    let ycol = params.ycol.as_deref().context("missing required parameter --ycol")?;
    let (header, rows) = read_csv(input)?;
    let xi = header
        .iter()
        .position(|h| h == xcol)
        .with_context(|| format!("column `{xcol}` not in {}", input.display()))?;
    let yi = header
        .iter()
        .position(|h| h == ycol)
        .with_context(|| format!("column `{ycol}` not in {}", input.display()))?;
    let mut pts = Vec::new();
    for row in &rows {
        let x: f64 = row[xi].parse().with_context(|| format!("bad x value `{}`", row[xi]))?;
        let y: f64 = row[yi].parse().with_context(|| format!("bad y value `{}`", row[yi]))?;
        pts.push((x, y));
    }
    let mut ladder = Ladder::new(pts, format!("{ycol} vs {xcol}"))?;
    if let Some(n) = params.drop_coarsest {
        ladder = ladder.drop_coarsest(n)?;
    }
    let fit = loglog_fit(&ladder);
    let mut rep =
        Report::new("fit", params, &["slope", "intercept", "max_residual", "n"]);
    rep.push_row(vec![
        fmt_f64(fit.slope),
        fmt_f64(fit.intercept),
        fmt_f64(fit.max_residual),
        fit.n.to_string(),
    ]);
    rep.set_summary(fit_json(&fit));
    rep.write(params)?;
    println!("slope = {}", fit.slope);
    Ok(0)
}

pub fn run_vinogradov(params: &Params) -> Result<i32> {
    let a = params.require_a()?;
    let b = params.require_b()?;
    let curve = CurveSpec::new(a)?;
    let deltas = parse_dyadic_ladder(params.require_delta()?)?;
    let mut rep = Report::new(
        "vinogradov",
        params,
        &["delta", "m", "total", "diagonal", "offdiagonal", "brute_total", "oracle_ok"],
    );
    let mut mismatches = 0u32;
    for &delta in &deltas {
        let spec = DecompositionSpec::standard(delta, b)?;
        let omegas = standard_separated_set(&spec, (-1.0, 1.0))?;
        let m = omegas.len();
        let q = CountQuery::standard(omegas, curve, &spec)?;
        let fast = count_fast(&q)?;
        let (brute_cell, ok_cell) = if params.oracle {
            let brute = count_bruteforce(&q)?;
            let ok = brute == fast;
            if !ok {
                mismatches += 1;
            }
            (brute.total.to_string(), u32::from(ok).to_string())
        } else {
            ("NA".into(), "NA".into())
        };
        println!(
            "delta={delta:.6e} m={m} total={} diagonal={} offdiagonal={}",
            fast.total,
            fast.diagonal,
            fast.offdiagonal()
        );
        rep.push_row(vec![
            fmt_f64(delta),
            m.to_string(),
            fast.total.to_string(),
            fast.diagonal.to_string(),
            fast.offdiagonal().to_string(),
            brute_cell,
            ok_cell,
        ]);
    }
    rep.set_summary(json!({ "oracle": params.oracle, "mismatches": mismatches }));
    rep.write(params)?;
    Ok(if mismatches == 0 { 0 } else { 2 })
}

pub fn run_strichartz(params: &Params) -> Result<i32> {
    let a = params.require_a()?;
    let curve = CurveSpec::new(a)?;
    let family = match params.family.as_deref().unwrap_or("dirichlet") {
        "dirichlet" => DataFamily::Dirichlet,
        "concentrated" => DataFamily::Concentrated,
        other => bail!("unknown data family `{other}` (dirichlet | concentrated)"),
    };
    let ns = parse_dyadic_ladder_usize(
        params.n.as_deref().context("missing required parameter --n")?,
    )?;
    let mut rep = Report::new("strichartz", params, &["n", "l4", "l2", "ratio"]);
    let mut pts = Vec::new();
    for &n in &ns {
        let data = match family {
            DataFamily::Dirichlet => TorusData::dirichlet(n)?,
            DataFamily::Concentrated => TorusData::concentrated_coherent(n, 0.5, &curve)?,
        };
        let report: NormReport = norm_report(&data, &curve)?;
        let ratio = report.l4_spacetime / report.l2_data;
        println!("n={n} l4={:.6e} l2={:.6e} ratio={ratio:.6}", report.l4_spacetime, report.l2_data);
        pts.push((n as f64, ratio));
        rep.push_row(vec![
            n.to_string(),
            fmt_f64(report.l4_spacetime),
            fmt_f64(report.l2_data),
            fmt_f64(ratio),
        ]);
    }
    let mut summary = json!({ "predicted_exponent": predicted_exponent(&curve) });
    if pts.len() >= 3 {
        let fit = loglog_fit(&Ladder::new(pts, "l4/l2 vs n")?);
        println!(
            "growth exponent = {:.6} (predicted {:.6})",
            fit.slope,
            predicted_exponent(&curve)
        );
        summary["fit"] = fit_json(&fit);
    }
    rep.set_summary(summary);
    rep.write(params)?;
    Ok(0)
}

pub fn run_bilinear(params: &Params) -> Result<i32> {
    let a = params.require_a()?;
    let curve = CurveSpec::new(a)?;
    let samples = params.samples.unwrap_or(64);
    let pairs: Vec<(i64, i64)> = match (&params.separations, params.k, params.j) {
        (Some(seps), _, _) => {
            // Separation ladder along (k, j) = (2s, s), which saturates the
            // <k-j>^(1-a) Jacobian decay.
            parse_int_list(seps)?.into_iter().map(|s| (2 * s, s)).collect()
        }
        (None, Some(k), Some(j)) => vec![(k, j)],
        _ => bail!("need either --separations or both --k and --j"),
    };
    let mut rep = Report::new(
        "bilinear",
        params,
        &["k", "j", "separation", "pushforward", "spacetime", "relgap", "normalized"],
    );
    let mut pts = Vec::new();
    for &(k, j) in &pairs {
        let r = bilinear::bilinear_block_norm(k, j, &curve, samples)?;
        let sep = (k - j).unsigned_abs();
        let normalized = r.pushforward.powi(2) / (r.f_l2_sq * r.g_l2_sq);
        println!(
            "k={k} j={j} pushforward={:.6e} spacetime={:.6e} relgap={:.3e}",
            r.pushforward, r.spacetime, r.relgap
        );
        pts.push((sep as f64, normalized));
        rep.push_row(vec![
            k.to_string(),
            j.to_string(),
            sep.to_string(),
            fmt_f64(r.pushforward),
            fmt_f64(r.spacetime),
            fmt_f64(r.relgap),
            fmt_f64(normalized),
        ]);
    }
    let mut summary = json!({ "predicted_slope": 1.0 - a });
    if pts.len() >= 3 {
        let fit = loglog_fit(&Ladder::new(pts, "normalized vs separation")?);
        println!("separation decay slope = {:.6}", fit.slope);
        summary["fit"] = fit_json(&fit);
    }
    rep.set_summary(summary);
    rep.write(params)?;
    Ok(0)
}

pub fn run_orthogonal(params: &Params) -> Result<i32> {
    let a = params.require_a()?;
    let curve = CurveSpec::new(a)?;
    let counts = match &params.blocks {
        Some(list) => parse_int_list(list)?,
        None => vec![4, 8, 16, 32],
    };
    let weight = bilinear::WeightSpec::standard();
    let mut rep = Report::new("orthogonal", params, &["k_count", "ratio", "weight_tail"]);
    let mut ratios = Vec::new();
    for &k in &counts {
        if k <= 0 {
            bail!("block counts must be positive, got {k}");
        }
        let data = bilinear::BlockData::unit_blocks(k as usize, 1.0 / 32.0)?;
        let ratio = bilinear::orthogonal_ratio(&data, &curve, &weight, 0, 0)?;
        println!("K={k} ratio={ratio:.6} (weight tail <= {:.3e})", weight.tail_bound());
        ratios.push(ratio);
        rep.push_row(vec![k.to_string(), fmt_f64(ratio), fmt_f64(weight.tail_bound())]);
    }
    let (lo, hi) = ratios
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), &r| (l.min(r), h.max(r)));
    rep.set_summary(json!({ "min_ratio": lo, "max_ratio": hi, "spread": hi / lo }));
    rep.write(params)?;
    Ok(0)
}
