//! One-site thermodynamic formalism: free energy, Gibbs states, the concave
//! entropy function of mean values, contour ladders, and mesh points.
//!
//! For generators `A_1..A_m` on a `d`-dimensional site, the free energy is
//! `p(alpha) = log Tr exp(sum_i alpha_i A_i)`. Its Legendre dual
//! `mu(x) = inf_alpha [p(alpha) - <alpha, x>]` is the maximal von Neumann
//! entropy of a one-site state with means `Tr(rho A_i) = x_i`; it is concave,
//! equals `log d` at the maximally mixed means, and is `-infinity` outside
//! the compact convex body of achievable means.
//!
//! The dual solver is a damped Newton iteration: exact gradient
//! `grad p(alpha) - x`, the positive-semidefinite symmetrized Gibbs
//! covariance as the Newton matrix, Armijo backtracking from `alpha = 0`.
//! Divergence of the iterates is a feature, not a failure: it is how points
//! outside the domain (objective decreasing along a ray) and boundary points
//! (objective plateaus at a finite value while the iterates run off) are
//! recognized.

mod ladder;
mod mesh;

pub use ladder::{
    audit_inclusions, contour_ladder, domain_sample, ContourLadder, DomainSample, InclusionAuditRow,
};
pub use mesh::{mesh_points, MeshPointSet};

use faer::Mat;

use crate::algebra::{hermitian_eig, HermitianOperator, C64};
use crate::error::{Error, Result};
use crate::macro_obs::ObservableFamily;

/// Settings for the dual Newton solver.
#[derive(Clone, Copy, Debug)]
pub struct DualSolverSettings {
    /// Stop when the gradient norm falls below this.
    pub grad_tol: f64,
    /// Iteration budget before declaring the solve inconclusive.
    pub max_iter: usize,
    /// `||alpha||` beyond which a still-decreasing objective means the dual
    /// is unbounded below (point outside the domain).
    pub divergence_norm: f64,
    /// Per-step objective decrease under which the objective counts as
    /// plateaued.
    pub plateau_decrease: f64,
    /// `||alpha||` beyond which a converged or plateaued solve is classified
    /// as a boundary point rather than an interior one. Boundary
    /// classification is best-effort: means within ~1e-9 of the boundary are
    /// indistinguishable from boundary means at the solver tolerance.
    pub boundary_alpha: f64,
}

impl Default for DualSolverSettings {
    fn default() -> Self {
        Self {
            grad_tol: 1e-10,
            max_iter: 500,
            divergence_norm: 1e4,
            plateau_decrease: 1e-10,
            boundary_alpha: 10.0,
        }
    }
}

/// Classification of a mean-value point against the entropy domain.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DomMembership {
    Interior,
    Boundary,
    Outside,
}

impl std::fmt::Display for DomMembership {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            DomMembership::Interior => "INTERIOR",
            DomMembership::Boundary => "BOUNDARY",
            DomMembership::Outside => "OUTSIDE",
        };
        f.write_str(s)
    }
}

/// Result of one entropy evaluation.
#[derive(Clone, Debug)]
pub struct MuEval {
    /// `mu(x)`; `f64::NEG_INFINITY` outside the domain.
    pub value: f64,
    pub membership: DomMembership,
    /// Final dual iterate.
    pub alpha: Vec<f64>,
    pub iterations: usize,
    pub grad_norm: f64,
}

/// A Gibbs state together with the spectral data it was built from.
#[derive(Clone, Debug)]
pub struct GibbsState {
    pub rho: HermitianOperator,
    /// Eigenvalue weights of `rho` (probabilities, descending in the
    /// underlying exponent's order — not sorted).
    pub weights: Vec<f64>,
    /// `p(alpha)` for the defining parameters.
    pub log_partition: f64,
    /// Means `Tr(rho A_i)`.
    pub means: Vec<f64>,
}

/// The free-energy surface of a generator family.
#[derive(Clone, Debug)]
pub struct FreeEnergySurface {
    family: ObservableFamily,
}

/// Internal spectral workspace for one `alpha`.
struct WeightedFrame {
    /// Eigenvalues of `sum alpha_i A_i`, ascending.
    exponents: Vec<f64>,
    /// Gibbs weights `exp(lambda_k - p)`.
    weights: Vec<f64>,
    /// `p(alpha)`.
    log_partition: f64,
    /// Generators rotated to the eigenbasis.
    rotated: Vec<Mat<C64>>,
    /// Means `Tr(rho A_i)`.
    means: Vec<f64>,
    /// Eigenbasis.
    basis: Mat<C64>,
}

impl FreeEnergySurface {
    pub fn new(family: ObservableFamily) -> Self {
        Self { family }
    }

    pub fn family(&self) -> &ObservableFamily {
        &self.family
    }

    pub fn m(&self) -> usize {
        self.family.m()
    }

    fn check_alpha(&self, alpha: &[f64]) -> Result<()> {
        if alpha.len() != self.m() {
            return Err(Error::DimensionMismatch {
                left: alpha.len(),
                right: self.m(),
            });
        }
        if alpha.iter().any(|a| !a.is_finite()) {
            return Err(Error::NonFinite);
        }
        Ok(())
    }

    fn frame(&self, alpha: &[f64]) -> Result<WeightedFrame> {
        self.check_alpha(alpha)?;
        let d = self.family.d();
        let mut s = Mat::<C64>::zeros(d, d);
        for (coef, g) in alpha.iter().zip(self.family.generators()) {
            for j in 0..d {
                for i in 0..d {
                    s[(i, j)] += g.entries()[(i, j)] * *coef;
                }
            }
        }
        let dec = hermitian_eig(&HermitianOperator::new(s)?)?;
        let exponents = dec.eigenvalues().to_vec();
        let top = exponents.last().copied().unwrap_or(0.0);
        let log_partition = top + exponents.iter().map(|l| (l - top).exp()).sum::<f64>().ln();
        let weights: Vec<f64> = exponents
            .iter()
            .map(|l| (l - log_partition).exp())
            .collect();
        let u = dec.eigenvectors();
        let rotated: Vec<Mat<C64>> = self
            .family
            .generators()
            .iter()
            .map(|g| u.adjoint() * g.entries() * u)
            .collect();
        let means = rotated
            .iter()
            .map(|a| (0..d).map(|k| weights[k] * a[(k, k)].re).sum())
            .collect();
        Ok(WeightedFrame {
            exponents,
            weights,
            log_partition,
            rotated,
            means,
            basis: u.to_owned(),
        })
    }

    /// `p(alpha) = log Tr exp(sum alpha_i A_i)`, evaluated with a max-shift
    /// so that large parameters cannot overflow.
    pub fn p(&self, alpha: &[f64]) -> Result<f64> {
        Ok(self.frame(alpha)?.log_partition)
    }

    /// Gradient `(Tr(rho A_1), ..., Tr(rho A_m))`.
    pub fn grad(&self, alpha: &[f64]) -> Result<Vec<f64>> {
        Ok(self.frame(alpha)?.means)
    }

    /// The Gibbs state `exp(sum alpha_i A_i - p)`.
    pub fn gibbs(&self, alpha: &[f64]) -> Result<GibbsState> {
        let frame = self.frame(alpha)?;
        let d = self.family.d();
        let u = frame.basis.as_ref();
        let scaled = Mat::from_fn(d, d, |i, j| u[(i, j)] * frame.weights[j]);
        let rho = HermitianOperator::from_computed(&scaled * u.adjoint());
        Ok(GibbsState {
            rho,
            weights: frame.weights,
            log_partition: frame.log_partition,
            means: frame.means,
        })
    }

    /// Symmetrized Gibbs covariance
    /// `C_ij = Tr(rho {A_i - <A_i>, A_j - <A_j>}) / 2`.
    ///
    /// This is the positive-semidefinite matrix the dual solver uses as its
    /// Newton matrix. For commuting families it coincides with the exact
    /// Hessian of `p`; in general the exact Hessian is the Kubo-Mori
    /// covariance ([`Self::kubo_mori`]), and using the symmetrized form as a
    /// quasi-Newton matrix does not affect the solution because the gradient
    /// is exact.
    pub fn covariance(&self, alpha: &[f64]) -> Result<Vec<Vec<f64>>> {
        let frame = self.frame(alpha)?;
        Ok(self.weighted_gram(&frame, |k, l| 0.5 * (frame.weights[k] + frame.weights[l])))
    }

    /// Kubo-Mori covariance: the exact Jacobian of `alpha -> grad p(alpha)`,
    /// with the divided-difference weight
    /// `(w_k - w_l)/(lambda_k - lambda_l)` (continued as `w_k` on ties).
    pub fn kubo_mori(&self, alpha: &[f64]) -> Result<Vec<Vec<f64>>> {
        let frame = self.frame(alpha)?;
        let p = frame.log_partition;
        let lam = frame.exponents.clone();
        Ok(self.weighted_gram(&frame, |k, l| {
            let t = 0.5 * (lam[k] - lam[l]);
            let mid = 0.5 * (lam[k] + lam[l]) - p;
            // (e^a - e^b)/(a - b) = e^{(a+b)/2} sinh(t)/t with t=(a-b)/2.
            let ratio = if t.abs() < 1e-7 {
                1.0 + t * t / 6.0
            } else {
                t.sinh() / t
            };
            mid.exp() * ratio
        }))
    }

    /// Gram matrix `sum_{k,l} phi(k,l) Re(Ac_i[k,l] conj(Ac_j[k,l]))` of the
    /// centered rotated generators, for a symmetric weight `phi`.
    fn weighted_gram<F: Fn(usize, usize) -> f64>(
        &self,
        frame: &WeightedFrame,
        phi: F,
    ) -> Vec<Vec<f64>> {
        let d = self.family.d();
        let m = self.m();
        let centered: Vec<Mat<C64>> = frame
            .rotated
            .iter()
            .zip(&frame.means)
            .map(|(a, &mean)| {
                Mat::from_fn(d, d, |i, j| {
                    if i == j {
                        a[(i, j)] - C64::new(mean, 0.0)
                    } else {
                        a[(i, j)]
                    }
                })
            })
            .collect();
        let mut out = vec![vec![0.0; m]; m];
        for i in 0..m {
            for j in i..m {
                let mut acc = 0.0;
                for k in 0..d {
                    for l in 0..d {
                        let prod = centered[i][(k, l)] * centered[j][(k, l)].conj();
                        acc += phi(k, l) * prod.re;
                    }
                }
                out[i][j] = acc;
                out[j][i] = acc;
            }
        }
        out
    }
}

/// `p(alpha)` for a family.
pub fn free_energy(family: &ObservableFamily, alpha: &[f64]) -> Result<f64> {
    FreeEnergySurface::new(family.clone()).p(alpha)
}

/// The Gibbs density matrix for the given parameters.
pub fn gibbs_state(family: &ObservableFamily, alpha: &[f64]) -> Result<HermitianOperator> {
    Ok(FreeEnergySurface::new(family.clone()).gibbs(alpha)?.rho)
}

/// The entropy function of a family, bundling the free-energy surface with
/// solver settings.
#[derive(Clone, Debug)]
pub struct EntropyProfile {
    surface: FreeEnergySurface,
    settings: DualSolverSettings,
}

impl EntropyProfile {
    pub fn new(family: ObservableFamily) -> Self {
        Self {
            surface: FreeEnergySurface::new(family),
            settings: DualSolverSettings::default(),
        }
    }

    pub fn with_settings(family: ObservableFamily, settings: DualSolverSettings) -> Self {
        Self {
            surface: FreeEnergySurface::new(family),
            settings,
        }
    }

    pub fn family(&self) -> &ObservableFamily {
        self.surface.family()
    }

    pub fn surface(&self) -> &FreeEnergySurface {
        &self.surface
    }

    pub fn settings(&self) -> &DualSolverSettings {
        &self.settings
    }

    pub fn m(&self) -> usize {
        self.surface.m()
    }

    /// Evaluates `mu(x) = inf_alpha [p(alpha) - <alpha, x>]` by damped
    /// Newton descent, classifying `x` against the domain along the way.
    pub fn mu(&self, x: &[f64]) -> Result<MuEval> {
        let m = self.m();
        if x.len() != m {
            return Err(Error::DimensionMismatch {
                left: x.len(),
                right: m,
            });
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite);
        }
        let s = &self.settings;
        let mut alpha = vec![0.0; m];
        // `value` tracks the exact objective at the current iterate; `best`
        // the lowest value seen (the reported infimum estimate).
        let mut value = self.surface.p(&alpha)? - dot(&alpha, x);
        let mut best = value;
        let mut last_decrease = f64::INFINITY;
        for iter in 0..s.max_iter {
            let frame = self.surface.frame(&alpha)?;
            let grad: Vec<f64> = frame
                .means
                .iter()
                .zip(x)
                .map(|(mean, xi)| mean - xi)
                .collect();
            let grad_norm = norm2(&grad);
            let alpha_norm = norm2(&alpha);
            if grad_norm <= s.grad_tol {
                let membership = if alpha_norm >= s.boundary_alpha {
                    DomMembership::Boundary
                } else {
                    DomMembership::Interior
                };
                return Ok(MuEval {
                    value: best,
                    membership,
                    alpha,
                    iterations: iter,
                    grad_norm,
                });
            }
            if alpha_norm > s.divergence_norm {
                // Far out and the objective is still falling: the dual is
                // unbounded below, so x lies outside the domain. If instead
                // the objective has flattened at a finite value, the infimum
                // is approached along the escaping ray: a boundary point.
                return Ok(if last_decrease > s.plateau_decrease {
                    MuEval {
                        value: f64::NEG_INFINITY,
                        membership: DomMembership::Outside,
                        alpha,
                        iterations: iter,
                        grad_norm,
                    }
                } else {
                    MuEval {
                        value: best,
                        membership: DomMembership::Boundary,
                        alpha,
                        iterations: iter,
                        grad_norm,
                    }
                });
            }
            if iter > 0 && last_decrease <= s.plateau_decrease && alpha_norm >= s.boundary_alpha {
                return Ok(MuEval {
                    value: best,
                    membership: DomMembership::Boundary,
                    alpha,
                    iterations: iter,
                    grad_norm,
                });
            }
            let hess = self.surface.covariance(&alpha)?;
            let dir = newton_direction(&hess, &grad);
            let slope = dot(&grad, &dir);
            debug_assert!(slope < 0.0 || grad_norm == 0.0);
            // Try the full quasi-Newton step on gradient contraction first.
            // The value-based test below breaks down near the optimum: the
            // quasi-Newton metric contracts the gradient only linearly on
            // non-commuting families, so decreases fall under the objective's
            // round-off floor while the gradient (computed spectrally,
            // without cancellation) is still above tolerance.
            let full: Vec<f64> = alpha.iter().zip(&dir).map(|(a, d)| a + d).collect();
            let full_frame = self.surface.frame(&full)?;
            let full_grad_norm = norm2(
                &full_frame
                    .means
                    .iter()
                    .zip(x)
                    .map(|(mean, xi)| mean - xi)
                    .collect::<Vec<f64>>(),
            );
            if full_grad_norm <= 0.9 * grad_norm {
                let full_value = full_frame.log_partition - dot(&full, x);
                last_decrease = (value - full_value).max(0.0);
                value = full_value;
                best = best.min(value);
                alpha = full;
                continue;
            }
            // Armijo backtracking on the dual value with halving.
            let mut stepped = false;
            let mut t = 1.0;
            while t >= 1e-8 {
                let cand: Vec<f64> = alpha.iter().zip(&dir).map(|(a, d)| a + t * d).collect();
                let cand_value = self.surface.p(&cand)? - dot(&cand, x);
                if cand_value <= value + 1e-4 * t * slope {
                    last_decrease = value - cand_value;
                    alpha = cand;
                    value = cand_value;
                    best = best.min(value);
                    stepped = true;
                    break;
                }
                t *= 0.5;
            }
            if !stepped {
                // Neither test certifies progress: numerically flat.
                if alpha_norm >= s.boundary_alpha {
                    return Ok(MuEval {
                        value: best,
                        membership: DomMembership::Boundary,
                        alpha,
                        iterations: iter,
                        grad_norm,
                    });
                }
                return Err(Error::Inconclusive(format!(
                    "dual line search stalled at iteration {iter} (grad norm {grad_norm:.3e})"
                )));
            }
        }
        Err(Error::Inconclusive(format!(
            "dual solver hit the iteration cap {} without a verdict",
            s.max_iter
        )))
    }
}

/// `mu(x)` with default settings; `NEG_INFINITY` outside the domain.
pub fn entropy_mu(family: &ObservableFamily, x: &[f64]) -> Result<f64> {
    Ok(EntropyProfile::new(family.clone()).mu(x)?.value)
}

/// Domain classification of `x` with default settings.
pub fn dom_membership(family: &ObservableFamily, x: &[f64]) -> Result<DomMembership> {
    Ok(EntropyProfile::new(family.clone()).mu(x)?.membership)
}

/// Independent check of `entropy_mu`: maximize the von Neumann entropy over
/// Gibbs states by matching the mean constraints `grad p(alpha) = x`
/// directly (Newton root-finding on the moment map with the exact Kubo-Mori
/// Jacobian), then report `-Tr(rho log rho)` of the matched state.
///
/// The two routes share only the Gibbs parameterization: the solve drives
/// the constraint residual instead of the dual objective, and the value is
/// the spectral entropy of the matched state instead of the dual value.
pub fn entropy_mu_oracle(family: &ObservableFamily, x: &[f64]) -> Result<f64> {
    Ok(oracle_eval(family, x, &DualSolverSettings::default())?.0)
}

/// Oracle entropy and membership verdict; see [`entropy_mu_oracle`].
pub fn oracle_eval(
    family: &ObservableFamily,
    x: &[f64],
    settings: &DualSolverSettings,
) -> Result<(f64, DomMembership)> {
    let surface = FreeEnergySurface::new(family.clone());
    let m = surface.m();
    if x.len() != m {
        return Err(Error::DimensionMismatch {
            left: x.len(),
            right: m,
        });
    }
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite);
    }
    let feas_tol = 1e-9;
    let mut alpha = vec![0.0; m];
    let mut psi = f64::INFINITY;
    for iter in 0..settings.max_iter {
        let frame = surface.frame(&alpha)?;
        let residual: Vec<f64> = frame
            .means
            .iter()
            .zip(x)
            .map(|(mean, xi)| mean - xi)
            .collect();
        let r = norm2(&residual);
        let alpha_norm = norm2(&alpha);
        if r <= feas_tol {
            let entropy = spectral_entropy(&frame.weights);
            let membership = if alpha_norm >= settings.boundary_alpha {
                DomMembership::Boundary
            } else {
                DomMembership::Interior
            };
            return Ok((entropy, membership));
        }
        let new_psi = 0.5 * r * r;
        let relative_drop = (psi - new_psi) / psi.max(1e-300);
        psi = new_psi;
        if alpha_norm > settings.divergence_norm
            || (iter > 5 && relative_drop < 1e-9 && r > 100.0 * feas_tol)
        {
            // The moment map cannot reach x: x is outside the closed domain.
            return Ok((f64::NEG_INFINITY, DomMembership::Outside));
        }
        let jac = surface.kubo_mori(&alpha)?;
        let dir = newton_direction(&jac, &residual);
        // Armijo on psi = ||residual||^2 / 2; the slope along the Newton
        // direction is exactly -2 psi.
        let mut t = 1.0;
        let mut stepped = false;
        while t >= 1e-14 {
            let cand: Vec<f64> = alpha.iter().zip(&dir).map(|(a, d)| a + t * d).collect();
            let cand_means = surface.grad(&cand)?;
            let cand_res: Vec<f64> = cand_means
                .iter()
                .zip(x)
                .map(|(mean, xi)| mean - xi)
                .collect();
            let cand_psi = 0.5 * norm2(&cand_res).powi(2);
            if cand_psi <= psi * (1.0 - 2e-4 * t) {
                alpha = cand;
                stepped = true;
                break;
            }
            t *= 0.5;
        }
        if !stepped {
            return Ok((f64::NEG_INFINITY, DomMembership::Outside));
        }
    }
    Err(Error::Inconclusive(
        "constraint matching hit the iteration cap without a verdict".into(),
    ))
}

/// `-sum w log w` over probability weights.
pub(crate) fn spectral_entropy(weights: &[f64]) -> f64 {
    weights
        .iter()
        .filter(|&&w| w > 0.0)
        .map(|&w| -w * w.ln())
        .sum()
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn norm2(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Solves `H dir = -grad` for a symmetric PSD `H`, adding a relative ridge
/// and falling back to steepest descent when the system is too singular.
fn newton_direction(hess: &[Vec<f64>], grad: &[f64]) -> Vec<f64> {
    let m = grad.len();
    let scale = (0..m).map(|i| hess[i][i].abs()).fold(0.0_f64, f64::max);
    let ridge = scale.max(1e-30) * 1e-13;
    let mut a = vec![vec![0.0; m]; m];
    for i in 0..m {
        for j in 0..m {
            a[i][j] = hess[i][j];
        }
        a[i][i] += ridge;
    }
    let mut rhs: Vec<f64> = grad.iter().map(|g| -g).collect();
    if let Some(sol) = solve_linear(&mut a, &mut rhs) {
        // Guard against directions that lost descent to ill-conditioning.
        if dot(&sol, grad) < 0.0 {
            return sol;
        }
    }
    grad.iter().map(|g| -g).collect()
}

/// Gaussian elimination with partial pivoting; `None` on singular systems.
fn solve_linear(a: &mut [Vec<f64>], b: &mut [f64]) -> Option<Vec<f64>> {
    let m = b.len();
    for col in 0..m {
        let pivot_row = (col..m)
            .max_by(|&r1, &r2| a[r1][col].abs().total_cmp(&a[r2][col].abs()))
            .unwrap();
        if a[pivot_row][col].abs() < 1e-300 {
            return None;
        }
        a.swap(col, pivot_row);
        b.swap(col, pivot_row);
        let b_col = b[col];
        let (pivot_rows, tail_rows) = a.split_at_mut(col + 1);
        let pivot = &pivot_rows[col];
        for (row, rhs) in tail_rows.iter_mut().zip(b[col + 1..].iter_mut()) {
            let factor = row[col] / pivot[col];
            for (entry, p) in row[col..].iter_mut().zip(&pivot[col..]) {
                *entry -= factor * p;
            }
            *rhs -= factor * b_col;
        }
    }
    let mut x = vec![0.0; m];
    for row in (0..m).rev() {
        let mut acc = b[row];
        for k in (row + 1)..m {
            acc -= a[row][k] * x[k];
        }
        x[row] = acc / a[row][row];
    }
    Some(x)
}
