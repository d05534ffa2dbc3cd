//! Spatial discretization of the elliptic operator `A u = -a div(grad u) + q u`
//! on a rectangle with homogeneous Neumann boundary conditions, and the
//! linear algebra built on top of it: banded Cholesky factorizations of
//! shifted systems and a Lanczos eigensolver for the density-weighted
//! eigenpairs `A phi = lambda rho phi`.
//!
//! The discretization is the energy form of the 5-point scheme on the nodal
//! grids of [`crate::grid`]: for every mesh edge the squared difference
//! quotient is weighted by the transverse trapezoid weight, and the reaction
//! term uses the lumped (trapezoid) mass.  This makes the stiffness matrix
//! `K` symmetric positive semi-definite with the natural (zero-flux)
//! boundary condition built in, second-order accurate at interior nodes, and
//! exact for the discrete Neumann eigenfunctions `cos(k pi x) cos(l pi y)`
//! on the unit square — which the eigensolver tests exploit.
//!
//! Matrices never leave the module: consumers see `K` through matrix-vector
//! products ([`EllipticOperator::stiffness_apply`]), factorized solves
//! ([`EllipticOperator::factor_shifted`]) and eigenpair extraction
//! ([`eigenpairs`]).  With row-major node ordering the bandwidth is `nx`, so
//! a banded Cholesky factorization costs `O(n nx^2)` — comfortably cheap up
//! to grids of a few hundred nodes per side, which covers every experiment
//! in this crate.

use crate::error::{Error, Result};
use crate::grid::{Grid2D, ScalarField};
use nalgebra::{DMatrix, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Relative pivot threshold below which a Cholesky factorization is
/// declared singular.
const PIVOT_REL_TOL: f64 = 1e-14;

/// Relative residual required of a Ritz pair before it is accepted.
const RITZ_REL_TOL: f64 = 1e-8;

/// The elliptic operator `-a lap + q` with Neumann boundary conditions,
/// assembled over a [`Grid2D`].
#[derive(Debug, Clone)]
pub struct EllipticOperator {
    grid: Grid2D,
    diffusion: f64,
    potential: ScalarField,
    /// Lumped mass diagonal (trapezoid quadrature weights).
    mass: Vec<f64>,
}

impl EllipticOperator {
    /// Builds the operator.  Requires a positive finite diffusion
    /// coefficient and a finite, non-negative potential sampled on the same
    /// grid.
    pub fn new(grid: Grid2D, diffusion: f64, potential: ScalarField) -> Result<Self> {
        if !(diffusion.is_finite() && diffusion > 0.0) {
            return Err(Error::domain("diffusion coefficient must be finite and positive"));
        }
        if potential.grid != grid {
            return Err(Error::domain("potential is sampled on a different grid"));
        }
        for j in 0..grid.ny {
            for i in 0..grid.nx {
                let q = potential.at(i, j);
                if !q.is_finite() || q < 0.0 {
                    return Err(Error::Assembly {
                        node: (i, j),
                        reason: format!("potential value {q} is negative or not finite"),
                    });
                }
            }
        }
        let mass = grid.quad_weights();
        Ok(EllipticOperator { grid, diffusion, potential, mass })
    }

    /// Grid the operator is assembled on.
    pub fn grid(&self) -> Grid2D {
        self.grid
    }

    /// Diffusion coefficient `a`.
    pub fn diffusion(&self) -> f64 {
        self.diffusion
    }

    /// Reaction coefficient field `q`.
    pub fn potential(&self) -> &ScalarField {
        &self.potential
    }

    /// Lumped mass diagonal `m_i` (trapezoid weights, includes `hx * hy`).
    pub fn mass(&self) -> &[f64] {
        &self.mass
    }

    /// Weight of the `x`-directed edge in mesh row `j`: diffusion times the
    /// transverse trapezoid weight over the mesh width.
    #[inline]
    fn edge_weight_x(&self, j: usize) -> f64 {
        let wy = if j == 0 || j == self.grid.ny - 1 { 0.5 } else { 1.0 };
        self.diffusion * wy * self.grid.hy() / self.grid.hx()
    }

    /// Weight of the `y`-directed edge in mesh column `i`.
    #[inline]
    fn edge_weight_y(&self, i: usize) -> f64 {
        let wx = if i == 0 || i == self.grid.nx - 1 { 0.5 } else { 1.0 };
        self.diffusion * wx * self.grid.hx() / self.grid.hy()
    }

    /// Energy-form stiffness product `K u` (weak form of `A u`; apply
    /// `M^{-1}` via [`Self::nodal_apply`] for nodal values).
    pub fn stiffness_apply(&self, u: &ScalarField) -> ScalarField {
        debug_assert_eq!(u.grid, self.grid);
        let (nx, ny) = (self.grid.nx, self.grid.ny);
        let mut out = vec![0.0; self.grid.n_nodes()];
        // Reaction term against the lumped mass.
        #[allow(clippy::needless_range_loop)]
        for k in 0..out.len() {
            out[k] = self.mass[k] * self.potential.values[k] * u.values[k];
        }
        // x-directed edges.
        for j in 0..ny {
            let w = self.edge_weight_x(j);
            for i in 0..nx - 1 {
                let k = self.grid.idx(i, j);
                let d = w * (u.values[k + 1] - u.values[k]);
                out[k] -= d;
                out[k + 1] += d;
            }
        }
        // y-directed edges.
        for i in 0..nx {
            let w = self.edge_weight_y(i);
            for j in 0..ny - 1 {
                let k = self.grid.idx(i, j);
                let d = w * (u.values[k + nx] - u.values[k]);
                out[k] -= d;
                out[k + nx] += d;
            }
        }
        ScalarField { grid: self.grid, values: out }
    }

    /// Nodal operator value `M^{-1} K u`, the discrete counterpart of
    /// `A u` as a plain nodal field.
    pub fn nodal_apply(&self, u: &ScalarField) -> ScalarField {
        let mut out = self.stiffness_apply(u);
        for (v, m) in out.values.iter_mut().zip(&self.mass) {
            *v /= m;
        }
        out
    }

    /// Dirichlet energy `u^T K u = a |grad u|^2 + (q u, u)` in the discrete
    /// quadrature.
    pub fn energy(&self, u: &ScalarField) -> f64 {
        let ku = self.stiffness_apply(u);
        u.values.iter().zip(&ku.values).map(|(a, b)| a * b).sum()
    }

    /// Assembles `K + shift * M_rho` in lower-band storage (`rho = None`
    /// means the unweighted `K`).
    fn assemble_band(&self, rho: Option<&ScalarField>, shift: f64) -> BandMatrix {
        let (nx, ny) = (self.grid.nx, self.grid.ny);
        let n = self.grid.n_nodes();
        let mut band = BandMatrix::zeros(n, nx);
        for j in 0..ny {
            for i in 0..nx {
                let k = self.grid.idx(i, j);
                let m = self.mass[k];
                let rho_k = rho.map_or(0.0, |r| r.values[k]);
                *band.entry(0, k) += m * (self.potential.values[k] + shift * rho_k);
            }
        }
        for j in 0..ny {
            let w = self.edge_weight_x(j);
            for i in 0..nx - 1 {
                let k = self.grid.idx(i, j);
                *band.entry(0, k) += w;
                *band.entry(0, k + 1) += w;
                *band.entry(1, k) -= w;
            }
        }
        for i in 0..nx {
            let w = self.edge_weight_y(i);
            for j in 0..ny - 1 {
                let k = self.grid.idx(i, j);
                *band.entry(0, k) += w;
                *band.entry(0, k + nx) += w;
                *band.entry(nx, k) -= w;
            }
        }
        band
    }

    /// Factors `K + shift * M_rho` (banded Cholesky) for repeated solves,
    /// e.g. one implicit time step per call.  Requires `shift >= 0` and a
    /// strictly positive density; fails with a conditioning error when the
    /// matrix is numerically semi-definite (the pure Neumann operator with
    /// `q = 0` and `shift = 0`).
    pub fn factor_shifted(&self, rho: &ScalarField, shift: f64) -> Result<ShiftedSolver> {
        if !(shift.is_finite() && shift >= 0.0) {
            return Err(Error::domain("shift must be finite and non-negative"));
        }
        validate_density(&self.grid, rho)?;
        let chol = BandCholesky::factor(self.assemble_band(Some(rho), shift))?;
        Ok(ShiftedSolver { chol })
    }

    /// Factors the unweighted stiffness `K` (used by the eigensolver).
    fn factor_stiffness(&self) -> Result<BandCholesky> {
        BandCholesky::factor(self.assemble_band(None, 0.0))
    }
}

/// Checks that a density field lives on `grid`, is finite and strictly
/// positive.
pub(crate) fn validate_density(grid: &Grid2D, rho: &ScalarField) -> Result<()> {
    if rho.grid != *grid {
        return Err(Error::domain("density is sampled on a different grid"));
    }
    for j in 0..grid.ny {
        for i in 0..grid.nx {
            let r = rho.at(i, j);
            if !r.is_finite() || r <= 0.0 {
                return Err(Error::Assembly {
                    node: (i, j),
                    reason: format!("density value {r} is not strictly positive"),
                });
            }
        }
    }
    Ok(())
}

/// Factorized `K + shift * M_rho`, ready for repeated right-hand sides.
#[derive(Debug, Clone)]
pub struct ShiftedSolver {
    chol: BandCholesky,
}

impl ShiftedSolver {
    /// Solves `(K + shift * M_rho) x = b` for a raw right-hand-side vector
    /// (already in weak/energy form, i.e. including any mass factors).
    pub fn solve(&self, rhs: &[f64]) -> Vec<f64> {
        self.chol.solve(rhs)
    }
}

/// Symmetric matrix in lower-band storage: `diags[d][i] = A[i + d][i]`.
#[derive(Debug, Clone)]
struct BandMatrix {
    n: usize,
    bandwidth: usize,
    /// `diags[d]` holds sub-diagonal `d`, length `n - d`.
    diags: Vec<Vec<f64>>,
}

impl BandMatrix {
    fn zeros(n: usize, bandwidth: usize) -> Self {
        let diags = (0..=bandwidth).map(|d| vec![0.0; n - d]).collect();
        BandMatrix { n, bandwidth, diags }
    }

    /// Mutable entry `A[i + d][i]`.
    #[inline]
    fn entry(&mut self, d: usize, i: usize) -> &mut f64 {
        &mut self.diags[d][i]
    }

    #[inline]
    fn get(&self, d: usize, i: usize) -> f64 {
        self.diags[d][i]
    }
}

/// Banded Cholesky factorization `A = L L^T` with the band of `A`.
#[derive(Debug, Clone)]
struct BandCholesky {
    n: usize,
    bandwidth: usize,
    /// `low[d][j] = L[j + d][j]`.
    low: Vec<Vec<f64>>,
}

impl BandCholesky {
    /// Factors a symmetric positive definite band matrix in place; a pivot
    /// below `PIVOT_REL_TOL` times the largest diagonal entry reports the
    /// offending index as a conditioning error.
    fn factor(a: BandMatrix) -> Result<Self> {
        let n = a.n;
        let bw = a.bandwidth;
        let diag_scale = a.diags[0].iter().fold(0.0_f64, |m, v| m.max(v.abs()));
        let mut low: Vec<Vec<f64>> = (0..=bw).map(|d| vec![0.0; n - d]).collect();
        for j in 0..n {
            let kmin = j.saturating_sub(bw);
            let mut d = a.get(0, j);
            for k in kmin..j {
                let l = low[j - k][k];
                d -= l * l;
            }
            if !(d.is_finite() && d > PIVOT_REL_TOL * diag_scale) {
                return Err(Error::Conditioning { mode: j, value: d });
            }
            let dj = d.sqrt();
            low[0][j] = dj;
            let imax = (j + bw).min(n - 1);
            for i in j + 1..=imax {
                let mut s = if i - j <= bw { a.get(i - j, j) } else { 0.0 };
                let kmin = i.saturating_sub(bw);
                for k in kmin..j {
                    s -= low[i - k][k] * low[j - k][k];
                }
                low[i - j][j] = s / dj;
            }
        }
        Ok(BandCholesky { n, bandwidth: bw, low })
    }

    /// Solves `L L^T x = b`.
    fn solve(&self, b: &[f64]) -> Vec<f64> {
        debug_assert_eq!(b.len(), self.n);
        let bw = self.bandwidth;
        let mut x = b.to_vec();
        // Forward substitution L y = b.  Index arithmetic mirrors the band
        // storage, so plain loops stay.
        #[allow(clippy::needless_range_loop)]
        for i in 0..self.n {
            let kmin = i.saturating_sub(bw);
            let mut s = x[i];
            for k in kmin..i {
                s -= self.low[i - k][k] * x[k];
            }
            x[i] = s / self.low[0][i];
        }
        // Back substitution L^T x = y.
        for i in (0..self.n).rev() {
            let kmax = (i + bw).min(self.n - 1);
            let mut s = x[i];
            #[allow(clippy::needless_range_loop)]
            for k in i + 1..=kmax {
                s -= self.low[k - i][i] * x[k];
            }
            x[i] = s / self.low[0][i];
        }
        x
    }
}

/// Density-weighted eigenpairs `K phi_n = lambda_n M_rho phi_n`, orthonormal
/// in the weighted inner product `(rho u, v)`.
#[derive(Debug, Clone)]
pub struct EigenBasis {
    /// Eigenvalues in ascending order.
    pub eigenvalues: Vec<f64>,
    /// Matching eigenvectors, `(rho phi_m, phi_n) = delta_mn`.
    pub modes: Vec<ScalarField>,
    /// The density the basis is orthonormal against.
    pub rho: ScalarField,
}

impl EigenBasis {
    /// Number of eigenpairs.
    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    /// True when the basis holds no modes.
    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    /// Grid the modes live on.
    pub fn grid(&self) -> Grid2D {
        self.rho.grid
    }

    /// Density-weighted coefficients `(rho f, phi_n)`; synthesizing with
    /// them reconstructs the projection of `f` onto the span.
    pub fn project_weighted(&self, f: &ScalarField) -> Vec<f64> {
        self.modes.iter().map(|phi| phi.l2_inner_weighted(&self.rho, f)).collect()
    }

    /// Plain L2 coefficients `(f, phi_n)` (the natural pairing for source
    /// terms, which enter the equation without the density weight).
    pub fn project_plain(&self, f: &ScalarField) -> Vec<f64> {
        self.modes.iter().map(|phi| phi.l2_inner(f)).collect()
    }

    /// Linear combination `sum_n coeffs[n] phi_n`.
    pub fn synthesize(&self, coeffs: &[f64]) -> ScalarField {
        debug_assert!(coeffs.len() <= self.len());
        let mut out = ScalarField::zeros(self.grid());
        for (c, phi) in coeffs.iter().zip(&self.modes) {
            out.axpy(*c, phi);
        }
        out
    }
}

/// Computes the `count` smallest density-weighted eigenpairs of the
/// operator by Lanczos iteration on `K^{-1} M_rho` (self-adjoint in the
/// `M_rho` inner product), with full reorthogonalization, deflation of
/// converged pairs, and random restarts.  The restarts make repeated
/// eigenvalues reachable: a single Krylov space sees one vector per
/// eigenvalue cluster, and the next restart explores the deflated
/// complement.  `seed` fixes the start vectors, making results reproducible
/// bit for bit.
pub fn eigenpairs(
    op: &EllipticOperator,
    rho: &ScalarField,
    count: usize,
    seed: u64,
) -> Result<EigenBasis> {
    let grid = op.grid();
    let n = grid.n_nodes();
    validate_density(&grid, rho)?;
    if count == 0 || count > n {
        return Err(Error::domain(format!(
            "requested {count} eigenpairs of an operator of dimension {n}"
        )));
    }
    let chol = op.factor_stiffness()?;
    let weights: Vec<f64> = op.mass().iter().zip(&rho.values).map(|(m, r)| m * r).collect();
    let inner = |u: &[f64], v: &[f64]| -> f64 {
        u.iter().zip(v).zip(&weights).map(|((a, b), w)| w * a * b).sum()
    };

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut locked: Vec<(f64, Vec<f64>)> = Vec::new();
    const MAX_RESTARTS: usize = 60;

    for _restart in 0..MAX_RESTARTS {
        if locked.len() >= count {
            break;
        }
        // Fresh start vector, orthogonal to everything already locked.
        let mut v: Vec<f64> = (0..n).map(|_| rng.gen::<f64>() - 0.5).collect();
        for (_, phi) in &locked {
            let c = inner(&v, phi);
            v.iter_mut().zip(phi).for_each(|(a, b)| *a -= c * b);
        }
        let norm = inner(&v, &v).sqrt();
        if norm < 1e-12 {
            continue;
        }
        v.iter_mut().for_each(|a| *a /= norm);

        // Lanczos run on the deflated operator.
        let m_max = ((count - locked.len()) * 2 + 40).min(n - locked.len());
        let mut basis: Vec<Vec<f64>> = vec![v];
        let mut alphas: Vec<f64> = Vec::new();
        let mut betas: Vec<f64> = Vec::new();
        for j in 0.. {
            let vj = basis[j].clone();
            let weighted: Vec<f64> = vj.iter().zip(&weights).map(|(a, w)| w * a).collect();
            let mut w = chol.solve(&weighted);
            let alpha = inner(&w, &vj);
            alphas.push(alpha);
            w.iter_mut().zip(&vj).for_each(|(a, b)| *a -= alpha * b);
            if j > 0 {
                let beta = betas[j - 1];
                w.iter_mut().zip(&basis[j - 1]).for_each(|(a, b)| *a -= beta * b);
            }
            // Full reorthogonalization (two passes) against the current
            // Krylov basis and the locked pairs.
            for _ in 0..2 {
                for u in basis.iter().chain(locked.iter().map(|(_, phi)| phi)) {
                    let c = inner(&w, u);
                    w.iter_mut().zip(u).for_each(|(a, b)| *a -= c * b);
                }
            }
            let beta = inner(&w, &w).sqrt();
            if alphas.len() >= m_max || !beta.is_finite() || beta < 1e-13 {
                break;
            }
            betas.push(beta);
            w.iter_mut().for_each(|a| *a /= beta);
            basis.push(w);
        }

        // Ritz extraction from the tridiagonal projection.
        let m = alphas.len();
        let tri = DMatrix::from_fn(m, m, |r, c| {
            if r == c {
                alphas[r]
            } else if r + 1 == c || c + 1 == r {
                betas[r.min(c)]
            } else {
                0.0
            }
        });
        let eig = SymmetricEigen::new(tri);
        // Largest mu of K^{-1} M_rho first, i.e. smallest lambda.
        let mut order: Vec<usize> = (0..m).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
        for &r in &order {
            if locked.len() >= count {
                break;
            }
            let mu = eig.eigenvalues[r];
            if !(mu.is_finite() && mu > 0.0) {
                continue;
            }
            let lambda = 1.0 / mu;
            let mut phi = vec![0.0; n];
            for (i, b) in basis.iter().enumerate() {
                let s = eig.eigenvectors[(i, r)];
                phi.iter_mut().zip(b).for_each(|(a, v)| *a += s * v);
            }
            // Explicit residual || K phi - lambda M_rho phi || relative to
            // the eigenvalue scale.
            let phi_field = ScalarField { grid, values: phi.clone() };
            let kphi = op.stiffness_apply(&phi_field);
            let mut res2 = 0.0;
            let mut scale2 = 0.0;
            for k in 0..n {
                let mw = weights[k] * phi[k];
                let r = kphi.values[k] - lambda * mw;
                res2 += r * r;
                scale2 += (lambda * mw) * (lambda * mw);
            }
            if res2.sqrt() > RITZ_REL_TOL * scale2.sqrt().max(f64::MIN_POSITIVE) {
                continue;
            }
            // Lock: re-orthogonalize against earlier locked pairs and
            // normalize in the weighted inner product.
            for (_, prev) in &locked {
                let c = inner(&phi, prev);
                phi.iter_mut().zip(prev).for_each(|(a, b)| *a -= c * b);
            }
            let norm = inner(&phi, &phi).sqrt();
            if norm < 1e-8 {
                continue;
            }
            phi.iter_mut().for_each(|a| *a /= norm);
            locked.push((lambda, phi));
        }
    }

    if locked.len() < count {
        return Err(Error::Eigen { converged: locked.len(), requested: count });
    }
    locked.sort_by(|a, b| a.0.total_cmp(&b.0));
    locked.truncate(count);
    let eigenvalues = locked.iter().map(|(l, _)| *l).collect();
    let modes = locked
        .into_iter()
        .map(|(_, phi)| ScalarField { grid, values: phi })
        .collect();
    Ok(EigenBasis { eigenvalues, modes, rho: rho.clone() })
}
