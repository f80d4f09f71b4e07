//! Commuting approximation: builds exactly commuting families `Y_i` close
//! to the almost-commuting mean observables `H_i`.
//!
//! The construction is sequential cluster-compress-recurse: diagonalize
//! `H_1`, group its eigenvalues into clusters (split at gaps above `tau`,
//! and cap cluster width at `tau`), compress `H_2` into each cluster
//! subspace and repeat, recursing through all observables. Every leaf
//! subspace becomes a cell: an orthogonal projection `Q_j` with a joint
//! value vector `zeta_j` (trace-means of the compressed observables on the
//! leaf). The outputs `Y_i = sum_j zeta_j^(i) Q_j` share the leaf eigenbasis
//! and therefore commute exactly; the per-observable distance to `H_i` is
//! bounded by the stage-`i` cluster width plus the compression residuals
//! discarded at earlier stages, and both the bound and the exact norm are
//! reported.

use faer::Mat;

use crate::algebra::{commutator_norm, hermitian_eig, operator_norm, HermitianOperator, C64};
use crate::error::{Error, Result};
use crate::macro_obs::{build_mean_observables, MeanObservableSet, ObservableFamily};
use crate::spectra::JointCellSource;
use crate::thermo::MeshPointSet;

/// Parameters of the clustering builder.
#[derive(Clone, Debug)]
pub struct ClusterParams {
    /// Clustering scale: eigenvalue gaps above `tau` split clusters, and no
    /// cluster grows wider than `tau`.
    pub tau: f64,
    /// Snap cell values to the nearest mesh point after building.
    pub snap: bool,
    /// Mesh to snap to; required when `snap` is set.
    pub mesh: Option<MeshPointSet>,
}

impl ClusterParams {
    pub fn new(tau: f64) -> Result<Self> {
        if !(tau.is_finite() && tau > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "tau must be a positive finite number, got {tau}"
            )));
        }
        Ok(Self {
            tau,
            snap: false,
            mesh: None,
        })
    }

    /// Default schedule `tau(n) = max_i ||A_i|| / sqrt(2n+1)`: the geometric
    /// mean of the `1/(2n+1)` commutator scale and the `O(1)` spectral
    /// spread. Falls back to `1/sqrt(2n+1)` for all-zero families.
    pub fn default_for(means: &MeanObservableSet) -> Self {
        let max_norm = means.scale_norms().iter().copied().fold(0.0_f64, f64::max);
        let scale = if max_norm > 0.0 { max_norm } else { 1.0 };
        let sites = 2.0 * means.n() as f64 + 1.0;
        Self {
            tau: scale / sites.sqrt(),
            snap: false,
            mesh: None,
        }
    }

    pub fn with_snap(mut self, mesh: MeshPointSet) -> Self {
        self.snap = true;
        self.mesh = Some(mesh);
        self
    }
}

/// One cell of a commuting model: a joint value vector and the column range
/// of the shared basis spanning its subspace.
#[derive(Clone, Debug)]
pub struct ModelCell {
    pub zeta: Vec<f64>,
    pub col_start: usize,
    pub rank: usize,
}

/// Diagnostics accumulated by the builder.
#[derive(Clone, Debug)]
pub struct BuildReport {
    pub tau: f64,
    /// Largest cluster width at each stage (observable index).
    pub stage_widths: Vec<f64>,
    /// For each observable `i`: sum over stages `s < i` of the Frobenius
    /// norm of the off-cluster part of (compressed) `H_i` discarded at
    /// stage `s`.
    pub residual_sums: Vec<f64>,
    /// Claimed per-observable error bound:
    /// `stage_widths[i] + 2 * residual_sums[i]`.
    pub error_bounds: Vec<f64>,
    /// Largest per-coordinate (infinity-norm) move applied by snapping, if
    /// snapping ran.
    pub snap_max_move: Option<f64>,
}

/// An exactly commuting family with its joint spectral cells.
///
/// All cells share one orthonormal basis: cell `j` owns the column range
/// `[col_start, col_start + rank)`, so `Q_j = G_j G_j^*` and
/// `Y_i = G D_i G^*` for the diagonal of cell values. Cells are sorted
/// lexicographically by value vector.
#[derive(Clone, Debug)]
pub struct CommutingModel {
    dim: usize,
    basis: Mat<C64>,
    cells: Vec<ModelCell>,
    y: Vec<HermitianOperator>,
    radius: f64,
    report: BuildReport,
}

/// Numerical audit of the model invariants.
#[derive(Clone, Debug)]
pub struct ModelAudit {
    /// `max |(G G^* - I)_{kl}|`: resolution of identity by the cells.
    pub identity_defect: f64,
    /// `max |(G^* G - I)_{kl}|`: idempotency and pairwise orthogonality.
    pub gram_defect: f64,
    /// `max_{i<j} ||[Y_i, Y_j]||`.
    pub max_commutator: f64,
    /// Whether every cell value lies in `[-R, R]^m`.
    pub values_in_range: bool,
}

impl CommutingModel {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn m(&self) -> usize {
        self.y.len()
    }

    pub fn num_cells(&self) -> usize {
        self.cells.len()
    }

    pub fn cells(&self) -> &[ModelCell] {
        &self.cells
    }

    pub fn y(&self) -> &[HermitianOperator] {
        &self.y
    }

    /// Spectral box radius `R > max_i ||A_i||` containing all cell values.
    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn report(&self) -> &BuildReport {
        &self.report
    }

    /// Dense projection onto one cell.
    pub fn cell_projection_matrix(&self, j: usize) -> HermitianOperator {
        self.span_projection(&[j])
    }

    fn span_projection(&self, selected: &[usize]) -> HermitianOperator {
        let total: usize = selected.iter().map(|&j| self.cells[j].rank).sum();
        let mut g = Mat::<C64>::zeros(self.dim, total);
        let mut col = 0;
        for &j in selected {
            let cell = &self.cells[j];
            for c in 0..cell.rank {
                for r in 0..self.dim {
                    g[(r, col)] = self.basis[(r, cell.col_start + c)];
                }
                col += 1;
            }
        }
        HermitianOperator::from_computed(&g * g.adjoint())
    }

    /// Checks the model invariants numerically.
    pub fn validate(&self) -> ModelAudit {
        let d = self.dim;
        let gg = &self.basis * self.basis.adjoint();
        let gram = self.basis.adjoint() * &self.basis;
        let mut identity_defect = 0.0_f64;
        let mut gram_defect = 0.0_f64;
        for i in 0..d {
            for j in 0..d {
                let target = if i == j { 1.0 } else { 0.0 };
                identity_defect = identity_defect.max((gg[(i, j)] - C64::new(target, 0.0)).norm());
                gram_defect = gram_defect.max((gram[(i, j)] - C64::new(target, 0.0)).norm());
            }
        }
        let mut max_commutator = 0.0_f64;
        for i in 0..self.m() {
            for j in (i + 1)..self.m() {
                max_commutator =
                    max_commutator.max(commutator_norm(&self.y[i], &self.y[j]).unwrap_or(f64::NAN));
            }
        }
        let values_in_range = self
            .cells
            .iter()
            .all(|c| c.zeta.iter().all(|&z| z.abs() <= self.radius));
        ModelAudit {
            identity_defect,
            gram_defect,
            max_commutator,
            values_in_range,
        }
    }
}

impl JointCellSource for CommutingModel {
    fn m(&self) -> usize {
        CommutingModel::m(self)
    }

    fn dim(&self) -> usize {
        CommutingModel::dim(self)
    }

    fn num_cells(&self) -> usize {
        CommutingModel::num_cells(self)
    }

    fn cell_center(&self, j: usize) -> &[f64] {
        &self.cells[j].zeta
    }

    fn cell_rank(&self, j: usize) -> usize {
        self.cells[j].rank
    }

    fn projection_onto(&self, selected: &[usize]) -> HermitianOperator {
        self.span_projection(selected)
    }
}

/// One leaf of the recursion: an orthonormal basis of its subspace plus all
/// observables compressed into it.
struct Leaf {
    /// `dim x r` with orthonormal columns.
    basis: Mat<C64>,
    /// `r x r` compressions `V^* H_i V` for every observable.
    compressed: Vec<Mat<C64>>,
}

/// Greedy clustering of ascending eigenvalues: start a new cluster when the
/// gap to the previous eigenvalue exceeds `tau` or the cluster would grow
/// wider than `tau`. Returns half-open index ranges.
fn cluster_ranges(eigenvalues: &[f64], tau: f64) -> Vec<(usize, usize)> {
    let mut ranges = Vec::new();
    let mut start = 0;
    for k in 1..eigenvalues.len() {
        let gap = eigenvalues[k] - eigenvalues[k - 1];
        let width = eigenvalues[k] - eigenvalues[start];
        if gap > tau || width > tau {
            ranges.push((start, k));
            start = k;
        }
    }
    if !eigenvalues.is_empty() {
        ranges.push((start, eigenvalues.len()));
    }
    ranges
}

/// Builds an exactly commuting model for a mean-observable family.
///
/// Never fails on a valid family: in the worst case (huge `tau`) every
/// stage keeps a single cluster and the result is one cell with
/// `Y_i = (trace mean) * I`.
pub fn sequential_joint_cluster(
    h_set: &MeanObservableSet,
    params: &ClusterParams,
) -> Result<CommutingModel> {
    if !(params.tau.is_finite() && params.tau > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "tau must be a positive finite number, got {}",
            params.tau
        )));
    }
    if params.snap && params.mesh.is_none() {
        return Err(Error::InvalidParameter(
            "snap requested without a mesh".into(),
        ));
    }
    let dim = h_set.dim();
    let m = h_set.m();
    let tau = params.tau;

    let mut leaves = vec![Leaf {
        basis: Mat::identity(dim, dim),
        compressed: h_set
            .operators()
            .iter()
            .map(|h| h.entries().to_owned())
            .collect(),
    }];
    let mut stage_widths = vec![0.0_f64; m];
    // residual[s][i]: squared Frobenius mass of H_i discarded at stage s.
    let mut discarded_sq = vec![vec![0.0_f64; m]; m];

    for stage in 0..m {
        let mut next = Vec::new();
        for leaf in &leaves {
            let r = leaf.compressed[stage].nrows();
            if r == 0 {
                continue;
            }
            let dec = hermitian_eig(&HermitianOperator::from_computed(
                leaf.compressed[stage].clone(),
            ))?;
            let lam = dec.eigenvalues();
            let u = dec.eigenvectors();
            let ranges = cluster_ranges(lam, tau);
            for &(lo, hi) in &ranges {
                stage_widths[stage] = stage_widths[stage].max(lam[hi - 1] - lam[lo]);
            }
            // Frobenius bookkeeping for later observables: rotating to the
            // eigenbasis then keeping only diagonal blocks discards exactly
            // the off-block Frobenius mass.
            let rotated: Vec<Mat<C64>> = (0..m)
                .map(|i| {
                    if i == stage {
                        Mat::from_fn(r, r, |a, b| {
                            if a == b {
                                C64::new(lam[a], 0.0)
                            } else {
                                C64::new(0.0, 0.0)
                            }
                        })
                    } else {
                        u.adjoint() * &leaf.compressed[i] * u
                    }
                })
                .collect();
            for i in (stage + 1)..m {
                let full: f64 = frob_sq(&rotated[i]);
                let kept: f64 = ranges
                    .iter()
                    .map(|&(lo, hi)| frob_sq_block(&rotated[i], lo, hi))
                    .sum();
                discarded_sq[stage][i] += (full - kept).max(0.0);
            }
            for &(lo, hi) in &ranges {
                let rc = hi - lo;
                let u_block = u.get(0..r, lo..hi);
                let child_basis = &leaf.basis * u_block;
                let child_compressed: Vec<Mat<C64>> = rotated
                    .iter()
                    .map(|mat| Mat::from_fn(rc, rc, |a, b| mat[(lo + a, lo + b)]))
                    .collect();
                next.push(Leaf {
                    basis: child_basis,
                    compressed: child_compressed,
                });
            }
        }
        leaves = next;
    }

    // Cell values: trace-means of each compressed observable on the final
    // leaf.
    let mut cells_raw: Vec<(Vec<f64>, Mat<C64>)> = leaves
        .into_iter()
        .map(|leaf| {
            let r = leaf.basis.ncols();
            let zeta: Vec<f64> = leaf
                .compressed
                .iter()
                .map(|mat| (0..r).map(|k| mat[(k, k)].re).sum::<f64>() / r as f64)
                .collect();
            (zeta, leaf.basis)
        })
        .collect();
    cells_raw.sort_by(|a, b| lex_cmp(&a.0, &b.0));

    let mut basis = Mat::<C64>::zeros(dim, dim);
    let mut cells = Vec::with_capacity(cells_raw.len());
    let mut col = 0;
    for (zeta, leaf_basis) in &cells_raw {
        let rank = leaf_basis.ncols();
        for c in 0..rank {
            for row in 0..dim {
                basis[(row, col + c)] = leaf_basis[(row, c)];
            }
        }
        cells.push(ModelCell {
            zeta: zeta.clone(),
            col_start: col,
            rank,
        });
        col += rank;
    }
    debug_assert_eq!(col, dim);

    let residual_sums: Vec<f64> = (0..m)
        .map(|i| (0..i).map(|s| discarded_sq[s][i].sqrt()).sum())
        .collect();
    let error_bounds: Vec<f64> = (0..m)
        .map(|i| stage_widths[i] + 2.0 * residual_sums[i])
        .collect();
    let max_norm = h_set.scale_norms().iter().copied().fold(0.0_f64, f64::max);
    let radius = if max_norm > 0.0 {
        max_norm * (1.0 + 1e-6)
    } else {
        1.0
    };
    let report = BuildReport {
        tau,
        stage_widths,
        residual_sums,
        error_bounds,
        snap_max_move: None,
    };
    let y = assemble_y(&basis, &cells, m, dim);
    let model = CommutingModel {
        dim,
        basis,
        cells,
        y,
        radius,
        report,
    };
    match (&params.mesh, params.snap) {
        (Some(mesh), true) => snap_to_mesh(&model, mesh),
        _ => Ok(model),
    }
}

fn lex_cmp(a: &[f64], b: &[f64]) -> std::cmp::Ordering {
    for (x, y) in a.iter().zip(b) {
        match x.total_cmp(y) {
            std::cmp::Ordering::Equal => continue,
            other => return other,
        }
    }
    std::cmp::Ordering::Equal
}

fn frob_sq(mat: &Mat<C64>) -> f64 {
    let mut acc = 0.0;
    for j in 0..mat.ncols() {
        for i in 0..mat.nrows() {
            acc += mat[(i, j)].norm_sqr();
        }
    }
    acc
}

fn frob_sq_block(mat: &Mat<C64>, lo: usize, hi: usize) -> f64 {
    let mut acc = 0.0;
    for j in lo..hi {
        for i in lo..hi {
            acc += mat[(i, j)].norm_sqr();
        }
    }
    acc
}

fn assemble_y(
    basis: &Mat<C64>,
    cells: &[ModelCell],
    m: usize,
    dim: usize,
) -> Vec<HermitianOperator> {
    (0..m)
        .map(|i| {
            let mut values = vec![0.0_f64; dim];
            for cell in cells {
                for c in 0..cell.rank {
                    values[cell.col_start + c] = cell.zeta[i];
                }
            }
            let scaled = Mat::from_fn(dim, dim, |r, c| basis[(r, c)] * values[c]);
            HermitianOperator::from_computed(&scaled * basis.adjoint())
        })
        .collect()
}

/// Distances between a model and the family it approximates.
#[derive(Clone, Debug)]
pub struct ApproximationError {
    /// Exact operator norms `||H_i - Y_i||`.
    pub per_observable: Vec<f64>,
    pub max_error: f64,
    /// Largest pairwise `||[Y_i, Y_j]||`.
    pub max_commutator: f64,
}

/// Exact distances `||H_i - Y_i||` and the worst pairwise `Y` commutator.
pub fn approximation_error(
    model: &CommutingModel,
    h_set: &MeanObservableSet,
) -> Result<ApproximationError> {
    if model.dim() != h_set.dim() {
        return Err(Error::DimensionMismatch {
            left: model.dim(),
            right: h_set.dim(),
        });
    }
    if model.m() != h_set.m() {
        return Err(Error::DimensionMismatch {
            left: model.m(),
            right: h_set.m(),
        });
    }
    let mut per_observable = Vec::with_capacity(h_set.m());
    for (h, y) in h_set.operators().iter().zip(model.y()) {
        per_observable.push(operator_norm(&h.sub(y)?)?);
    }
    let max_error = per_observable.iter().copied().fold(0.0_f64, f64::max);
    let mut max_commutator = 0.0_f64;
    for i in 0..model.m() {
        for j in (i + 1)..model.m() {
            max_commutator = max_commutator.max(commutator_norm(&model.y()[i], &model.y()[j])?);
        }
    }
    Ok(ApproximationError {
        per_observable,
        max_error,
        max_commutator,
    })
}

/// One row of a convergence experiment.
#[derive(Clone, Debug)]
pub struct ConvergenceRow {
    pub n: u32,
    pub tau: f64,
    pub errors: Vec<f64>,
    pub max_error: f64,
    pub max_commutator: f64,
    pub cells: usize,
    /// Builder-claimed error bounds, for the decomposition audit.
    pub error_bounds: Vec<f64>,
}

/// Runs the full pipeline across window sizes. `tau` overrides the default
/// schedule when given.
pub fn convergence_experiment(
    family: &ObservableFamily,
    n_values: &[u32],
    tau: Option<f64>,
    max_dim: usize,
) -> Result<Vec<ConvergenceRow>> {
    let mut rows = Vec::with_capacity(n_values.len());
    for &n in n_values {
        let h_set = build_mean_observables(family, n, max_dim)?;
        let params = match tau {
            Some(t) => ClusterParams::new(t)?,
            None => ClusterParams::default_for(&h_set),
        };
        let model = sequential_joint_cluster(&h_set, &params)?;
        let err = approximation_error(&model, &h_set)?;
        rows.push(ConvergenceRow {
            n,
            tau: params.tau,
            errors: err.per_observable,
            max_error: err.max_error,
            max_commutator: err.max_commutator,
            cells: model.num_cells(),
            error_bounds: model.report().error_bounds.clone(),
        });
    }
    Ok(rows)
}

/// Replaces every cell value by the nearest mesh point (Euclidean; ties go
/// to the earlier point in layer order). Projections are unchanged, so the
/// commutation invariants survive; each `||H_i - Y_i||` moves by at most
/// the largest per-coordinate displacement, recorded in the report.
pub fn snap_to_mesh(model: &CommutingModel, mesh: &MeshPointSet) -> Result<CommutingModel> {
    let flat = mesh.labeled_points();
    if flat.is_empty() {
        return Err(Error::InvalidParameter("mesh has no points".into()));
    }
    let m = model.m();
    if flat[0].1.len() != m {
        return Err(Error::DimensionMismatch {
            left: flat[0].1.len(),
            right: m,
        });
    }
    let mut max_move = 0.0_f64;
    let mut snapped: Vec<(Vec<f64>, usize, usize)> = model
        .cells
        .iter()
        .map(|cell| {
            let mut best: &[f64] = flat[0].1;
            let mut best_d = f64::INFINITY;
            for &(_, p) in &flat {
                let d: f64 = p
                    .iter()
                    .zip(&cell.zeta)
                    .map(|(a, b)| (a - b) * (a - b))
                    .sum();
                if d < best_d {
                    best_d = d;
                    best = p;
                }
            }
            let inf_move = best
                .iter()
                .zip(&cell.zeta)
                .map(|(a, b)| (a - b).abs())
                .fold(0.0_f64, f64::max);
            max_move = max_move.max(inf_move);
            (best.to_vec(), cell.col_start, cell.rank)
        })
        .collect();
    // Cell values changed: restore lexicographic order, permuting the basis
    // columns along with the cells.
    snapped.sort_by(|a, b| lex_cmp(&a.0, &b.0));
    let dim = model.dim;
    let mut basis = Mat::<C64>::zeros(dim, dim);
    let mut cells = Vec::with_capacity(snapped.len());
    let mut col = 0;
    for (zeta, old_start, rank) in snapped {
        for c in 0..rank {
            for row in 0..dim {
                basis[(row, col + c)] = model.basis[(row, old_start + c)];
            }
        }
        cells.push(ModelCell {
            zeta,
            col_start: col,
            rank,
        });
        col += rank;
    }
    let y = assemble_y(&basis, &cells, m, dim);
    let mut report = model.report.clone();
    report.snap_max_move = Some(max_move);
    for bound in report.error_bounds.iter_mut() {
        *bound += max_move;
    }
    Ok(CommutingModel {
        dim,
        basis,
        cells,
        y,
        radius: model.radius,
        report,
    })
}
