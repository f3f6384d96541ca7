//! One function per command. Each returns a table with one row per grid
//! value plus a list of summary entries for the report.

use kakeya_core::box_dimension::{
    box_count, box_count_series, corpus, dimension_fit, dimension_fit_with, dyadic_deltas, Collection, DimensionFit,
};
use kakeya_core::constructions::{adversarial_placement, build_book, build_fan, BookSpec};
use kakeya_core::fit::linear_fit;
use kakeya_core::geometry::{point, Direction, Hyperplane, Point, Segment};
use kakeya_core::lift_project::{
    default_hyperplane, gamma0, lift_family, perturb_gamma, project_family, restrict_directions, spaghetti_check,
    DirectionSet, HTilde, RadialFamily, SpaghettiConfig,
};
use kakeya_core::union_measure::{
    bonferroni_lower_bound, book_bound_certificate, exact_union_area_2d, l1_certificate, BookBoundConfig,
    L1Config, BOUND_TOL,
};
use rayon::prelude::*;
use serde::Serialize;

use crate::config::*;
use crate::error::Result;

/// Monte Carlo samples when neither the config nor the flags give any.
pub const DEFAULT_SAMPLES_3D: u64 = 10_000_000;
/// Identity tolerance for `π_{γ₀} ∘ lift`.
pub const IDENTITY_TOL: f64 = 1e-12;
/// Distance of lifted lines from `H̃`.
pub const RESIDUAL_TOL: f64 = 1e-10;
/// Distance of projected lines from the origin.
pub const ORIGIN_TOL: f64 = 1e-9;
/// Distance of sector samples from the family.
pub const SECTOR_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Row {
    pub grid: f64,
    pub measured: f64,
    pub bound: f64,
    pub stderr: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub verdict: bool,
    pub rows: Vec<Row>,
    pub summary: Vec<(String, String)>,
}

/// Full-precision float text used in every artifact.
pub fn fmt(x: f64) -> String {
    format!("{x:.16e}")
}

fn entry(k: &str, v: impl ToString) -> (String, String) {
    (k.to_string(), v.to_string())
}

fn fmt_list(v: &[f64]) -> String {
    v.iter().map(|&x| fmt(x)).collect::<Vec<_>>().join(" ")
}

pub fn execute(cfg: &ExperimentConfig) -> Result<Outcome> {
    let out = match &cfg.run {
        Run::Fan(p) => fan(cfg, p),
        Run::CertifyL1(p) => certify_l1(cfg, p),
        Run::Book(p) => book(cfg, p),
        Run::CertifyBook(p) => certify_book(cfg, p),
        Run::Boxdim(p) => boxdim(p),
        Run::Lift(p) => lift(cfg, p),
        Run::Spaghetti(p) => spaghetti(cfg, p),
        Run::Adversarial(p) => adversarial(cfg, p),
    };
    match out {
        Err(crate::error::CliError::Core(kakeya_core::Error::Inconclusive(msg))) => Ok(Outcome {
            verdict: false,
            rows: vec![],
            summary: vec![entry("inconclusive", msg)],
        }),
        other => other,
    }
}

fn fan(cfg: &ExperimentConfig, p: &FanParams) -> Result<Outcome> {
    let placement = p.placement.resolve(cfg.seed);
    let rows = p
        .eps_grid
        .par_iter()
        .map(|&eps| {
            let f = build_fan(p.alpha, p.c, eps, &placement)?;
            let m = exact_union_area_2d(&f)?;
            Ok((f.len(), Row { grid: eps, measured: m.value, bound: bonferroni_lower_bound(&f), stderr: m.stderr }))
        })
        .collect::<Result<Vec<_>>>()?;
    let verdict = rows.iter().all(|(_, r)| r.measured >= r.bound - BOUND_TOL);
    let counts: Vec<String> = rows.iter().map(|(n, _)| n.to_string()).collect();
    Ok(Outcome {
        verdict,
        summary: vec![entry("tubes", counts.join(" "))],
        rows: rows.into_iter().map(|(_, r)| r).collect(),
    })
}

fn certify_l1(cfg: &ExperimentConfig, p: &CertifyL1Params) -> Result<Outcome> {
    let r = l1_certificate(&L1Config {
        alpha: p.alpha,
        c: p.c,
        placement: p.placement.resolve(cfg.seed),
        eps_grid: p.eps_grid.clone(),
        slack: p.slack,
        engine: p.engine,
    })?;
    let rows = (0..r.eps_grid.len())
        .map(|k| Row {
            grid: r.eps_grid[k],
            measured: r.measured[k].value,
            bound: r.bonferroni_lower[k],
            stderr: r.measured[k].stderr,
        })
        .collect();
    let exponent_ok = r.fitted_exponent <= (1.0 - p.alpha) + p.slack;
    let r2_ok = r.r_squared >= p.min_r_squared;
    Ok(Outcome {
        verdict: r.verdict && r2_ok,
        rows,
        summary: vec![
            entry("fitted_exponent", fmt(r.fitted_exponent)),
            entry("exponent_limit", fmt(1.0 - p.alpha + p.slack)),
            entry("r_squared", fmt(r.r_squared)),
            entry("min_r_squared", fmt(p.min_r_squared)),
            entry("fitted_constant_a", fmt(r.fitted_constant_a)),
            entry("bounds_hold", r.bounds_hold),
            entry("exponent_ok", exponent_ok),
            entry("r_squared_ok", r2_ok),
            entry("tubes", r.tube_counts.iter().map(|n| n.to_string()).collect::<Vec<_>>().join(" ")),
        ],
    })
}

fn book(cfg: &ExperimentConfig, p: &BookParams) -> Result<Outcome> {
    let beta = p.beta.unwrap_or(p.alpha * p.alpha);
    let counts = p
        .eps_grid
        .par_iter()
        .enumerate()
        .map(|(k, &eps)| {
            let spec = BookSpec {
                angle_step: eps.powf(beta),
                offsets: p.offsets.resolve(cfg.sub_seed(k as u64)),
                bound_c: p.bound_c,
                ..BookSpec::standard(p.n, p.alpha, eps, 0)
            };
            let b = build_book(&spec)?;
            let segs = b.segments()?;
            let len = segs.len();
            Ok((len, box_count(&Collection::from_segments(segs), eps)?))
        })
        .collect::<Result<Vec<_>>>()?;
    let xs: Vec<f64> = p.eps_grid.iter().map(|e| -e.ln()).collect();
    let ys: Vec<f64> = counts.iter().map(|&(_, c)| (c as f64).ln()).collect();
    let fit = linear_fit(&xs, &ys)?;
    let min_dim = p.min_dimension.unwrap_or(p.n as f64 - 0.3);
    let (e0, c0) = (p.eps_grid[0], counts[0].1 as f64);
    let rows = p
        .eps_grid
        .iter()
        .zip(&counts)
        .map(|(&eps, &(_, c))| Row { grid: eps, measured: c as f64, bound: c0 * (e0 / eps).powf(min_dim), stderr: 0.0 })
        .collect();
    let volumes: Vec<f64> = p.eps_grid.iter().zip(&counts).map(|(e, &(_, c))| c as f64 * e.powi(p.n as i32)).collect();
    Ok(Outcome {
        verdict: fit.slope >= min_dim && fit.r_squared >= p.min_r_squared,
        rows,
        summary: vec![
            entry("beta", fmt(beta)),
            entry("dimension", fmt(fit.slope)),
            entry("min_dimension", fmt(min_dim)),
            entry("r_squared", fmt(fit.r_squared)),
            entry("min_r_squared", fmt(p.min_r_squared)),
            entry("segments", counts.iter().map(|c| c.0.to_string()).collect::<Vec<_>>().join(" ")),
            entry("box_volume", fmt_list(&volumes)),
        ],
    })
}

fn certify_book(cfg: &ExperimentConfig, p: &CertifyBookParams) -> Result<Outcome> {
    let r = book_bound_certificate(&BookBoundConfig {
        alpha: p.alpha,
        beta: p.beta,
        c: p.c,
        offsets: p.offsets.resolve(cfg.sub_seed(0)),
        eps_grid: p.eps_grid.clone(),
        samples: cfg.samples.unwrap_or(DEFAULT_SAMPLES_3D),
        seed: cfg.seed,
        bound_c: p.bound_c,
    })?;
    let rows = (0..r.eps_grid.len())
        .map(|k| Row {
            grid: r.eps_grid[k],
            measured: r.measured[k].value,
            bound: r.lower_curve[k],
            stderr: r.measured[k].stderr,
        })
        .collect();
    Ok(Outcome {
        verdict: r.verdict,
        rows,
        summary: vec![
            entry("beta", fmt(r.beta)),
            entry("c1", fmt(r.c1)),
            entry("c2", fmt(r.c2)),
            entry("curve_positive", r.curve_positive),
            entry("pages", r.pages.iter().map(|n| n.to_string()).collect::<Vec<_>>().join(" ")),
            entry("tubes", r.tubes.iter().map(|n| n.to_string()).collect::<Vec<_>>().join(" ")),
            entry("first_order", fmt_list(&r.first_order)),
            entry("cross_page", fmt_list(&r.cross_page)),
        ],
    })
}

pub fn corpus_collection(c: &Corpus) -> Result<Collection> {
    Ok(match c {
        Corpus::Point { n } => corpus::single_point(*n),
        Corpus::Segment => corpus::unit_segment(),
        Corpus::Square { level } => corpus::filled_square(*level),
        Corpus::Cantor { level } => corpus::cantor_dust(*level),
        Corpus::Points { points } => Collection::from_points(points.iter().map(|q| point(q)).collect()),
        Corpus::Segments { segments } => Collection::from_segments(
            segments
                .iter()
                .map(|[a, b]| Segment::from_endpoints(&point(a), &point(b)))
                .collect::<kakeya_core::Result<_>>()?,
        ),
    })
}

fn fit_rows(deltas: &[f64], counts: &[u64], fit: &DimensionFit) -> Vec<Row> {
    deltas
        .iter()
        .zip(counts)
        .map(|(&d, &c)| Row {
            grid: d,
            measured: c as f64,
            bound: (fit.intercept - fit.slope * d.ln()).exp(),
            stderr: 0.0,
        })
        .collect()
}

fn fit_summary(fit: &DimensionFit) -> Vec<(String, String)> {
    vec![
        entry("dimension", fmt(fit.slope)),
        entry("r_squared", fmt(fit.r_squared)),
        entry("fit_delta_min", fmt(fit.delta_min)),
        entry("fit_delta_max", fmt(fit.delta_max)),
        entry("fit_scales", fit.scales),
    ]
}

fn boxdim(p: &BoxdimParams) -> Result<Outcome> {
    let c = corpus_collection(&p.corpus)?;
    let s = box_count_series(&c, &dyadic_deltas(p.delta_from, p.delta_to))?;
    let fit = dimension_fit_with(&s, p.exclude_coarsest)?;
    let within = p.expected.is_none_or(|e| (fit.slope - e).abs() <= p.tolerance);
    let mut summary = fit_summary(&fit);
    if let Some(e) = p.expected {
        summary.push(entry("expected", fmt(e)));
        summary.push(entry("tolerance", fmt(p.tolerance)));
    }
    Ok(Outcome { verdict: within && fit.r_squared >= p.min_r_squared, rows: fit_rows(&s.deltas, &s.counts, &fit), summary })
}

fn lift(cfg: &ExperimentConfig, p: &LiftParams) -> Result<Outcome> {
    let h = match &p.normal {
        Some(v) => Hyperplane::new(Direction::from_slice(v)?, p.offset),
        None if p.offset == 0.0 => default_hyperplane(p.n),
        None => Hyperplane::coordinate(p.n, 0, p.offset),
    };
    let cap = DirectionSet::new(h.normal().clone(), p.margin.acos())?;
    let centers = kakeya_core::constructions::random_ball(p.n, p.directions, 1.0, cfg.sub_seed(0));
    let family = cap
        .samples(p.directions)
        .into_iter()
        .zip(centers)
        .map(|(d, c)| Segment::unit(c, d))
        .collect::<kakeya_core::Result<Vec<_>>>()?;
    let (_, kept) = restrict_directions(&family, &h, p.margin)?;
    let records = lift_family(&kept, &h)?;
    let identity = project_family(&records, &gamma0(p.n)?, IDENTITY_TOL)?;
    let identity_err = identity.report.as_ref().map_or(f64::INFINITY, |r| r.max_displacement);
    let ht = HTilde::new(&h)?;
    let residual = records
        .iter()
        .map(|r| ht.line_residual(&r.lifted))
        .collect::<kakeya_core::Result<Vec<_>>>()?
        .into_iter()
        .fold(0.0, f64::max);
    let origin = Point::zeros(p.n);
    let origin_dist = ht.project(&records)?.iter().map(|s| s.line_distance_to(&origin)).fold(0.0, f64::max);
    let max_x = records.iter().map(|r| r.x_theta.norm()).fold(0.0, f64::max);

    let mut rows = Vec::with_capacity(p.deltas.len());
    let mut lipschitz = Vec::new();
    let mut degenerate = Vec::new();
    let mut all_passed = true;
    for (k, &delta) in p.deltas.iter().enumerate() {
        let g = perturb_gamma(&gamma0(p.n)?, delta, cfg.sub_seed(k as u64 + 1))?;
        let target = 10.0 * delta * (1.0 + max_x);
        let proj = project_family(&records, &g, target)?;
        let rep = proj.report.expect("γ maps into the original dimension");
        all_passed &= rep.passed;
        lipschitz.push(proj.lipschitz_proxy);
        degenerate.push(proj.degenerate.len().to_string());
        rows.push(Row { grid: delta, measured: rep.max_displacement, bound: target, stderr: 0.0 });
    }
    let verdict =
        all_passed && identity_err <= IDENTITY_TOL && residual <= RESIDUAL_TOL && origin_dist <= ORIGIN_TOL;
    Ok(Outcome {
        verdict,
        rows,
        summary: vec![
            entry("kept", records.len()),
            entry("identity_error", fmt(identity_err)),
            entry("h_tilde_residual", fmt(residual)),
            entry("origin_distance", fmt(origin_dist)),
            entry("max_x_theta", fmt(max_x)),
            entry("lipschitz_proxy", fmt_list(&lipschitz)),
            entry("degenerate", degenerate.join(" ")),
        ],
    })
}

fn spaghetti(cfg: &ExperimentConfig, p: &SpaghettiParams) -> Result<Outcome> {
    let family = RadialFamily { n: p.n, offset: p.center_offset, length: p.length };
    let cap = DirectionSet::new(Direction::axis(p.n, p.cap_axis), p.cap_radius)?;
    let w = spaghetti_check(
        &family,
        &cap,
        &SpaghettiConfig {
            direction_samples: p.direction_samples,
            sector_samples: p.sector_samples,
            min_members: p.min_members,
            seed: cfg.seed,
        },
    )?;
    let c = Collection::from_segments(w.sector_skeleton(p.skeleton_directions()));
    let s = box_count_series(&c, &dyadic_deltas(p.delta_from, p.delta_to()))?;
    let fit = dimension_fit(&s)?;
    let min_dim = p.min_dimension.unwrap_or(p.n as f64 - 0.1);
    let mut summary = vec![
        entry("shell", w.shell),
        entry("n_max", w.decomposition.n_max),
        entry("subcap_radius", fmt(w.subcap.radius())),
        entry("subcap_members", w.subcap_members.len()),
        entry("sector_samples", w.sector_samples.len()),
        entry("max_sample_distance", fmt(w.max_sample_distance)),
        entry("largest_failing_eps", fmt(w.largest_failing_eps)),
        entry("min_dimension", fmt(min_dim)),
    ];
    summary.extend(fit_summary(&fit));
    Ok(Outcome {
        verdict: w.max_sample_distance <= SECTOR_TOL && fit.slope >= min_dim,
        rows: fit_rows(&s.deltas, &s.counts, &fit),
        summary,
    })
}

fn adversarial(cfg: &ExperimentConfig, p: &AdversarialParams) -> Result<Outcome> {
    let o = adversarial_placement(p.alpha, p.c, p.eps, p.iterations, cfg.seed)?;
    let initial = o.objective[0];
    let monotone = o.objective.windows(2).all(|w| w[1] <= w[0]);
    let last = *o.objective.last().expect("at least one iteration");
    Ok(Outcome {
        verdict: monotone && last <= initial,
        rows: o
            .objective
            .iter()
            .enumerate()
            .map(|(i, &v)| Row { grid: i as f64, measured: v, bound: initial, stderr: 0.0 })
            .collect(),
        summary: vec![
            entry("accepted", o.accepted),
            entry("initial", fmt(initial)),
            entry("final", fmt(last)),
            entry("placement", serde_json::to_string(&o.placement())?),
        ],
    })
}
