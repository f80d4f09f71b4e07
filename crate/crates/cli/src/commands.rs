//! The seven pipeline commands. Each one consumes the parsed run context
//! and returns fully materialized artifacts; nothing touches the filesystem
//! here, so failed runs cannot leave partial outputs.

use macrospin_core::spectra::JointCellSource;
use macrospin_core::thermo::{audit_inclusions, domain_sample};
use macrospin_core::{
    beta_min_rank, build_interaction_means, build_mean_observables, coarse_grain, contour_ladder,
    convergence_experiment, hermitian_eig, mean_entropy_product, mesh_points, operator_norm,
    sequential_joint_cluster, ClusterParams, CommutingModel, EntropyProfile, FreeEnergySurface,
    HermitianOperator,
};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use serde_json::json;

use crate::config::{grid_points, RunContext};
use crate::output::{fmt_f64, Artifact, CsvBuilder};
use crate::{CliError, CliResult};

/// Free energy `p`, gradient, and smallest Hessian eigenvalue over an
/// `alpha_grid`.
pub fn cmd_freeenergy(ctx: &RunContext) -> CliResult<Vec<Artifact>> {
    let family = ctx.family()?;
    let m = family.m();
    let axes =
        ctx.config.alpha_grid.as_deref().ok_or_else(|| {
            CliError::Invalid("freeenergy needs an \"alpha_grid\" section".into())
        })?;
    if axes.len() != m {
        return Err(CliError::Invalid(format!(
            "alpha_grid has {} axes but the family has {m} generators",
            axes.len()
        )));
    }
    let surface = FreeEnergySurface::new(family);

    let mut header: Vec<String> = (1..=m).map(|i| format!("alpha_{i}")).collect();
    header.push("p".into());
    header.extend((1..=m).map(|i| format!("grad_{i}")));
    header.push("hessian_min_eig".into());
    let header_refs: Vec<&str> = header.iter().map(String::as_str).collect();
    let mut csv = CsvBuilder::new(&ctx.provenance_comment(), &header_refs);

    for alpha in grid_points(axes)? {
        let p = surface.p(&alpha)?;
        let grad = surface.grad(&alpha)?;
        let cov = surface.covariance(&alpha)?;
        let min_eig = min_symmetric_eigenvalue(&cov)?;
        let mut row: Vec<String> = alpha.iter().copied().map(fmt_f64).collect();
        row.push(fmt_f64(p));
        row.extend(grad.into_iter().map(fmt_f64));
        row.push(fmt_f64(min_eig));
        csv.push_row(&row);
    }
    Ok(vec![Artifact::new("freeenergy.csv", csv.finish())])
}

/// Entropy values and membership verdicts on an `x_grid`, or at
/// `random_points` drawn from the run seed.
pub fn cmd_entropy(ctx: &RunContext) -> CliResult<Vec<Artifact>> {
    let family = ctx.family()?;
    let m = family.m();
    let profile = EntropyProfile::with_settings(family, ctx.solver_settings());

    let points: Vec<Vec<f64>> = match (&ctx.config.x_grid, &ctx.config.random_points) {
        (Some(axes), None) => {
            if axes.len() != m {
                return Err(CliError::Invalid(format!(
                    "x_grid has {} axes but the family has {m} generators",
                    axes.len()
                )));
            }
            grid_points(axes)?
        }
        (None, Some(sample)) => {
            if sample.lo.len() != m || sample.hi.len() != m {
                return Err(CliError::Invalid(format!(
                    "random_points bounds must have {m} coordinates"
                )));
            }
            if sample
                .lo
                .iter()
                .zip(&sample.hi)
                .any(|(lo, hi)| lo.is_nan() || hi.is_nan() || lo > hi)
            {
                return Err(CliError::Invalid(
                    "random_points needs lo <= hi per coordinate".into(),
                ));
            }
            let mut rng = ChaCha20Rng::seed_from_u64(ctx.seed);
            (0..sample.count)
                .map(|_| {
                    sample
                        .lo
                        .iter()
                        .zip(&sample.hi)
                        .map(|(lo, hi)| lo + (hi - lo) * rng.random::<f64>())
                        .collect()
                })
                .collect()
        }
        (Some(_), Some(_)) => {
            return Err(CliError::Invalid(
                "give either \"x_grid\" or \"random_points\", not both".into(),
            ))
        }
        (None, None) => {
            return Err(CliError::Invalid(
                "entropy needs an \"x_grid\" or \"random_points\" section".into(),
            ))
        }
    };

    let mut header: Vec<String> = (1..=m).map(|i| format!("x_{i}")).collect();
    header.push("mu".into());
    header.push("membership".into());
    let header_refs: Vec<&str> = header.iter().map(String::as_str).collect();
    let mut csv = CsvBuilder::new(&ctx.provenance_comment(), &header_refs);

    for x in points {
        let eval = profile.mu(&x)?;
        let mut row: Vec<String> = x.iter().copied().map(fmt_f64).collect();
        row.push(fmt_f64(eval.value));
        row.push(eval.membership.to_string());
        csv.push_row(&row);
    }
    Ok(vec![Artifact::new("entropy.csv", csv.finish())])
}

/// Contour ladder plus mesh layers, with the per-level inclusion audit, as
/// one JSON document.
pub fn cmd_contours(ctx: &RunContext) -> CliResult<Vec<Artifact>> {
    let family = ctx.family()?;
    let m = family.m();
    let profile = EntropyProfile::with_settings(family, ctx.solver_settings());
    let epsilon = ctx
        .config
        .epsilon
        .ok_or_else(|| CliError::Invalid("contours needs \"epsilon\"".into()))?;
    let eta = ctx
        .config
        .eta
        .ok_or_else(|| CliError::Invalid("contours needs \"eta\"".into()))?;
    let resolution = ctx
        .config
        .resolution
        .unwrap_or(eta / (2.0 * (m as f64).sqrt()));

    let sample = domain_sample(&profile, resolution)?;
    let ladder = contour_ladder(&profile, &sample, epsilon)?;
    let audit = audit_inclusions(&ladder, &sample);
    let mesh = mesh_points(&profile, &ladder, eta, Some(resolution))?;

    let doc = json!({
        "config_sha256": ctx.config_sha256,
        "seed": ctx.seed,
        "epsilon": epsilon,
        "eta": eta,
        "resolution": resolution,
        "x0": ladder.x0,
        "c": ladder.c,
        "levels": ladder.levels,
        "audit": audit.iter().map(|row| json!({
            "k": row.k,
            "holds": row.holds,
            "worst_distance": row.worst_distance,
            "points_checked": row.points_checked,
        })).collect::<Vec<_>>(),
        "layers": mesh.layers,
        "total_points": mesh.total_points(),
    });
    let mut bytes = serde_json::to_vec_pretty(&doc)
        .map_err(|e| CliError::Invalid(format!("serialization failed: {e}")))?;
    bytes.push(b'\n');
    Ok(vec![Artifact::new("contours.json", bytes)])
}

/// Convergence table of the commuting-approximant pipeline across window
/// sizes, optionally with one model JSON per window.
pub fn cmd_approx(ctx: &RunContext) -> CliResult<Vec<Artifact>> {
    let family = ctx.family()?;
    let m = family.m();
    let n_values = ctx.n_values()?;
    let rows = convergence_experiment(&family, n_values, ctx.config.tau, ctx.max_dim)?;

    let mut header: Vec<String> = vec!["n".into(), "tau".into()];
    header.extend((1..=m).map(|i| format!("error_{i}")));
    header.push("max_error".into());
    header.push("max_commutator".into());
    header.push("cells".into());
    header.extend((1..=m).map(|i| format!("bound_{i}")));
    let header_refs: Vec<&str> = header.iter().map(String::as_str).collect();
    let mut csv = CsvBuilder::new(&ctx.provenance_comment(), &header_refs);

    for row in &rows {
        let mut cells: Vec<String> = vec![row.n.to_string(), fmt_f64(row.tau)];
        cells.extend(row.errors.iter().copied().map(fmt_f64));
        cells.push(fmt_f64(row.max_error));
        cells.push(fmt_f64(row.max_commutator));
        cells.push(row.cells.to_string());
        cells.extend(row.error_bounds.iter().copied().map(fmt_f64));
        csv.push_row(&cells);
    }

    let mut artifacts = vec![Artifact::new("approx.csv", csv.finish())];
    if ctx.config.emit_model.unwrap_or(false) {
        for &n in n_values {
            let means = build_mean_observables(&family, n, ctx.max_dim)?;
            let params = match ctx.config.tau {
                Some(tau) => ClusterParams::new(tau)?,
                None => ClusterParams::default_for(&means),
            };
            let model = sequential_joint_cluster(&means, &params)?;
            artifacts.push(model_artifact(ctx, n, &model)?);
        }
    }
    Ok(artifacts)
}

fn model_artifact(ctx: &RunContext, n: u32, model: &CommutingModel) -> CliResult<Artifact> {
    let report = model.report();
    let doc = json!({
        "config_sha256": ctx.config_sha256,
        "seed": ctx.seed,
        "n": n,
        "dim": model.dim(),
        "radius": model.radius(),
        "tau": report.tau,
        "stage_widths": report.stage_widths,
        "error_bounds": report.error_bounds,
        "snap_max_move": report.snap_max_move,
        "cells": model.cells().iter().map(|cell| json!({
            "zeta": cell.zeta,
            "rank": cell.rank,
            "col_start": cell.col_start,
        })).collect::<Vec<_>>(),
    });
    let mut bytes = serde_json::to_vec_pretty(&doc)
        .map_err(|e| CliError::Invalid(format!("serialization failed: {e}")))?;
    bytes.push(b'\n');
    Ok(Artifact::new(format!("approx_model_n{n}.json"), bytes))
}

/// Spectral box-projection ranks and rates across window sizes.
pub fn cmd_rankrate(ctx: &RunContext) -> CliResult<Vec<Artifact>> {
    let family = ctx.family()?;
    let m = family.m();
    let spec = ctx.box_spec()?;
    let n_values = ctx.n_values()?;

    let use_model = ctx.config.use_model.unwrap_or(m > 1);
    let tau = ctx.config.tau;
    let max_dim = ctx.max_dim;
    let supplier_family = family.clone();
    let mut supplier = move |n: u32| -> macrospin_core::Result<Box<dyn JointCellSource>> {
        let means = build_mean_observables(&supplier_family, n, max_dim)?;
        let params = match tau {
            Some(t) => ClusterParams::new(t)?,
            None => ClusterParams::default_for(&means),
        };
        let model = sequential_joint_cluster(&means, &params)?;
        Ok(Box::new(model))
    };
    let supplier_opt: Option<
        &mut dyn FnMut(u32) -> macrospin_core::Result<Box<dyn JointCellSource>>,
    > = if use_model { Some(&mut supplier) } else { None };
    let records = macrospin_core::rank_rate(&family, &spec, n_values, supplier_opt, max_dim)?;

    let mut header: Vec<String> = vec!["n".into()];
    header.extend((1..=m).map(|i| format!("center_{i}")));
    header.extend([
        "halfwidth".into(),
        "kind".into(),
        "rank".into(),
        "rate".into(),
        "target_sup_mu".into(),
        "deficit".into(),
        "slack".into(),
    ]);
    let header_refs: Vec<&str> = header.iter().map(String::as_str).collect();
    let mut csv = CsvBuilder::new(&ctx.provenance_comment(), &header_refs);

    for rec in &records {
        let mut row: Vec<String> = vec![rec.n.to_string()];
        row.extend(rec.center.iter().copied().map(fmt_f64));
        row.push(fmt_f64(rec.halfwidth));
        row.push(format!("{:?}", rec.kind).to_lowercase());
        row.push(rec.rank.to_string());
        row.push(fmt_f64(rec.rate));
        row.push(fmt_f64(rec.target_sup_mu));
        row.push(fmt_f64(rec.deficit()));
        row.push(fmt_f64(rec.slack()));
        csv.push_row(&row);
    }
    Ok(vec![Artifact::new("rankrate.csv", csv.finish())])
}

/// Minimal-rank projector sizes for a product state across window sizes and
/// mass defects.
pub fn cmd_beta(ctx: &RunContext) -> CliResult<Vec<Artifact>> {
    let state = ctx.product_state()?;
    let n_values = ctx.n_values()?;
    let epsilons = match ctx.config.epsilons.as_deref() {
        Some(values) if !values.is_empty() => values,
        _ => {
            return Err(CliError::Invalid(
                "beta needs a non-empty \"epsilons\" list".into(),
            ))
        }
    };
    let entropy = mean_entropy_product(&state);

    let mut csv = CsvBuilder::new(
        &ctx.provenance_comment(),
        &["n", "epsilon", "rank", "beta", "rate", "state_entropy"],
    );
    for &epsilon in epsilons {
        for &n in n_values {
            let record = beta_min_rank(&state, epsilon, n)?;
            csv.push_row(&[
                record.n.to_string(),
                fmt_f64(record.epsilon),
                record.rank.to_string(),
                fmt_f64(record.beta),
                fmt_f64(record.rate),
                fmt_f64(entropy),
            ]);
        }
    }
    Ok(vec![Artifact::new("beta.csv", csv.finish())])
}

/// Coarse-grained block averages against plain interval means, with the
/// reported error bounds.
pub fn cmd_coarsegrain(ctx: &RunContext) -> CliResult<Vec<Artifact>> {
    let phis = ctx.interactions()?;
    let m = phis.len();
    let n_values = ctx.n_values()?;
    let m_block = ctx
        .config
        .block_half_width
        .ok_or_else(|| CliError::Invalid("coarsegrain needs \"block_half_width\"".into()))?;

    let mut header: Vec<String> = vec!["block_half_width".into(), "n".into()];
    for i in 1..=m {
        header.push(format!("deviation_{i}"));
        header.push(format!("bound_{i}"));
        header.push(format!("tail_{i}"));
    }
    let header_refs: Vec<&str> = header.iter().map(String::as_str).collect();
    let mut csv = CsvBuilder::new(&ctx.provenance_comment(), &header_refs);

    for &n in n_values {
        let plain = build_interaction_means(&phis, n, ctx.max_dim)?;
        let coarse = coarse_grain(&phis, m_block, n, ctx.max_dim)?;
        let mut row: Vec<String> = vec![m_block.to_string(), n.to_string()];
        for i in 0..m {
            let diff = coarse.operators()[i].sub(&plain.operators()[i])?;
            let deviation = operator_norm(&diff)?;
            let report = &coarse.reports()[i];
            row.push(fmt_f64(deviation));
            row.push(fmt_f64(report.boundary_bound));
            row.push(fmt_f64(report.tail_max()));
        }
        csv.push_row(&row);
    }
    Ok(vec![Artifact::new("coarsegrain.csv", csv.finish())])
}

/// Smallest eigenvalue of a real symmetric matrix given as rows.
fn min_symmetric_eigenvalue(rows: &[Vec<f64>]) -> CliResult<f64> {
    let dim = rows.len();
    let mat = faer::Mat::from_fn(dim, dim, |i, j| {
        num_complex::Complex64::new(rows[i][j], 0.0)
    });
    let op = HermitianOperator::new(mat)?;
    let dec = hermitian_eig(&op)?;
    Ok(dec.eigenvalues()[0])
}
