//! BGK collision operator and the Fredholm machinery of its linearization.
//!
//! The nonlinear operator is Q(f) = (M[f] - f) / tau with M[f] the Maxwellian
//! sharing f's moments. Linearizing about a local Maxwellian M in the
//! weighted space L2(M^-1 dv) gives L g = (Pi g - g) / tau, where Pi is the
//! orthogonal projection onto the collision invariants
//! span{M, v_1 M, ..., v_d M, |v|^2 M}. L is self-adjoint and negative
//! semidefinite with nullspace dimension d + 2, spectral gap 1/tau, and
//! pseudoinverse -tau times the identity on the orthogonal complement.
//!
//! A synthetic mode accepts an arbitrary symmetric negative-semidefinite
//! matrix so projection, gap, and pseudoinverse can be exercised on operators
//! with richer spectra than BGK's two-point one.

use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::OnceLock;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::phase_space::{maxwellian, maxwellian_cell, moments, DistField, MacroFields, VelocityGrid};
use crate::tol;

/// BGK model parameters.
#[derive(Debug, Clone, Copy)]
pub struct BgkConfig {
    /// Relaxation time tau > 0.
    pub tau: f64,
    /// Gas constant used for moment extraction.
    pub gas_constant: f64,
}

impl BgkConfig {
    pub fn new(tau: f64, gas_constant: f64) -> Result<Self> {
        if !(tau > 0.0 && tau.is_finite()) {
            return Err(Error::InvalidInput(format!("relaxation time must be positive, got {tau}")));
        }
        if !(gas_constant > 0.0 && gas_constant.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "gas constant must be positive, got {gas_constant}"
            )));
        }
        Ok(Self { tau, gas_constant })
    }
}

/// Weighted L2 space with inner product sum_k w_k g_k h_k / M_k.
///
/// The reference weights are 1/M at the quadrature nodes; for synthetic
/// operators both w and M degenerate to 1 and this is the standard dot
/// product.
#[derive(Debug, Clone)]
pub struct WeightedSpace {
    pub quad_weights: Vec<f64>,
    pub maxwellian: Vec<f64>,
}

impl WeightedSpace {
    /// Space attached to a cell's local Maxwellian on a velocity grid.
    pub fn from_maxwellian(vgrid: &VelocityGrid, maxwellian: Vec<f64>) -> Result<Self> {
        if maxwellian.len() != vgrid.n_nodes() {
            return Err(Error::InvalidInput(
                "Maxwellian sample length does not match grid".into(),
            ));
        }
        if maxwellian.iter().any(|m| *m <= 0.0 || !m.is_finite()) {
            return Err(Error::Numerical(
                "Maxwellian underflows to zero on this grid; shrink the cutoff or raise T".into(),
            ));
        }
        Ok(Self { quad_weights: vgrid.weights.clone(), maxwellian })
    }

    /// Standard dot-product space of the given dimension.
    pub fn standard(n: usize) -> Self {
        Self { quad_weights: vec![1.0; n], maxwellian: vec![1.0; n] }
    }

    pub fn len(&self) -> usize {
        self.quad_weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.quad_weights.is_empty()
    }

    pub fn inner(&self, g: &[f64], h: &[f64]) -> f64 {
        let mut acc = 0.0;
        for k in 0..self.len() {
            acc += self.quad_weights[k] * g[k] * h[k] / self.maxwellian[k];
        }
        acc
    }

    pub fn norm(&self, g: &[f64]) -> f64 {
        self.inner(g, g).max(0.0).sqrt()
    }

    /// Diagonal weight d_k = w_k / M_k of the inner product.
    fn diag(&self) -> Vec<f64> {
        self.quad_weights
            .iter()
            .zip(&self.maxwellian)
            .map(|(w, m)| w / m)
            .collect()
    }
}

/// Spectrum summary of a linearized operator.
#[derive(Debug, Clone)]
pub struct SpectrumReport {
    /// Eigenvalues of L, sorted ascending (all <= 0 up to roundoff).
    pub eigenvalues: Vec<f64>,
    pub nullspace_dim: usize,
    /// Spectral gap: smallest |eigenvalue| over the non-null part.
    pub lambda0: f64,
    /// Measured pseudoinverse bound (see [`LinearizedOp::c_inv`]).
    pub c_inv: f64,
}

#[derive(Debug)]
enum Kernel {
    /// Projector representation: L g = (Pi g - g) / tau.
    Bgk { tau: f64 },
    /// Dense symmetric matrix in orthonormal coordinates, with its spectrum.
    Dense { matrix: DMatrix<f64>, eigvals: DVector<f64>, eigvecs: DMatrix<f64>, null_thresh: f64 },
}

/// Linearization of the collision operator at a local Maxwellian, together
/// with its weighted space and orthonormal nullspace basis.
///
/// Immutable after construction apart from the monotone `c_inv` accumulator,
/// so it can be shared across threads.
#[derive(Debug)]
pub struct LinearizedOp {
    pub space: WeightedSpace,
    /// Orthonormal basis of the nullspace in the weighted inner product,
    /// stored as node-value vectors.
    pub nullspace_basis: Vec<Vec<f64>>,
    kernel: Kernel,
    gap: OnceLock<f64>,
    /// Bit pattern of the largest observed |g| / |h| over pseudoinverse calls.
    c_inv_bits: AtomicU64,
}

fn update_max(cell: &AtomicU64, val: f64) {
    let mut cur = cell.load(Ordering::Relaxed);
    loop {
        if val <= f64::from_bits(cur) {
            return;
        }
        match cell.compare_exchange_weak(cur, val.to_bits(), Ordering::Relaxed, Ordering::Relaxed) {
            Ok(_) => return,
            Err(seen) => cur = seen,
        }
    }
}

/// Builds the linearized BGK operator at one cell of the given fields.
///
/// The nullspace basis {M, v_i M, |v|^2 M} is orthonormalized by modified
/// Gram-Schmidt with one reorthogonalization pass; a numerically dependent
/// invariant set is reported as an ill-conditioned basis.
pub fn build_linearized(
    fields: &MacroFields,
    cell: usize,
    vgrid: &VelocityGrid,
    cfg: &BgkConfig,
) -> Result<LinearizedOp> {
    if cell >= fields.n_cells() {
        return Err(Error::InvalidInput(format!(
            "cell {cell} out of range for {} cells",
            fields.n_cells()
        )));
    }
    if fields.dim != vgrid.dim {
        return Err(Error::InvalidInput(format!(
            "field dimension {} does not match grid dimension {}",
            fields.dim, vgrid.dim
        )));
    }
    let m = maxwellian_cell(fields, cell, vgrid)?;
    let space = WeightedSpace::from_maxwellian(vgrid, m.clone())?;
    let d = vgrid.dim;
    let mut raw: Vec<Vec<f64>> = Vec::with_capacity(d + 2);
    raw.push(m.clone());
    for ax in 0..d {
        raw.push(
            m.iter()
                .zip(&vgrid.nodes)
                .map(|(mk, node)| mk * node[ax])
                .collect(),
        );
    }
    raw.push(
        m.iter()
            .zip(&vgrid.nodes)
            .map(|(mk, node)| {
                let v2: f64 = node.iter().take(d).map(|v| v * v).sum();
                mk * v2
            })
            .collect(),
    );

    // Condition estimate of the raw Gram matrix before orthonormalization.
    let k = raw.len();
    let mut gram = DMatrix::<f64>::zeros(k, k);
    for i in 0..k {
        for j in 0..=i {
            let v = space.inner(&raw[i], &raw[j]);
            gram[(i, j)] = v;
            gram[(j, i)] = v;
        }
    }
    // Normalize to unit diagonal so the estimate is scale-free.
    let scales: Vec<f64> = (0..k).map(|i| gram[(i, i)].sqrt()).collect();
    if scales.iter().any(|s| !(s.is_finite() && *s > 0.0)) {
        return Err(Error::IllConditioned { cond: f64::INFINITY });
    }
    for i in 0..k {
        for j in 0..k {
            gram[(i, j)] /= scales[i] * scales[j];
        }
    }
    let eig = gram.symmetric_eigen();
    let emax = eig.eigenvalues.iter().fold(f64::MIN, |a, &b| a.max(b));
    let emin = eig.eigenvalues.iter().fold(f64::MAX, |a, &b| a.min(b));
    if !(emin > 0.0) || emax / emin > 1e13 {
        return Err(Error::IllConditioned { cond: if emin > 0.0 { emax / emin } else { f64::INFINITY } });
    }

    let mut basis: Vec<Vec<f64>> = Vec::with_capacity(k);
    for mut v in raw {
        for _pass in 0..2 {
            for e in &basis {
                let c = space.inner(&v, e);
                for (vi, ei) in v.iter_mut().zip(e) {
                    *vi -= c * ei;
                }
            }
        }
        let n = space.norm(&v);
        if !(n > 0.0 && n.is_finite()) {
            return Err(Error::IllConditioned { cond: f64::INFINITY });
        }
        for vi in &mut v {
            *vi /= n;
        }
        basis.push(v);
    }

    Ok(LinearizedOp {
        space,
        nullspace_basis: basis,
        kernel: Kernel::Bgk { tau: cfg.tau },
        gap: OnceLock::new(),
        c_inv_bits: AtomicU64::new(0),
    })
}

impl LinearizedOp {
    /// Wraps a user-supplied symmetric negative-semidefinite matrix, given in
    /// orthonormal coordinates (standard dot product). Eigenvectors with
    /// |eigenvalue| below `null_tol` relative to the spectral radius form the
    /// prescribed nullspace.
    pub fn from_matrix(matrix: DMatrix<f64>, null_tol: f64) -> Result<Self> {
        let n = matrix.nrows();
        if n == 0 || n != matrix.ncols() {
            return Err(Error::InvalidInput(format!(
                "operator matrix must be square and nonempty, got {}x{}",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        if matrix.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidInput("operator matrix has non-finite entries".into()));
        }
        let scale = matrix.iter().fold(0.0f64, |a, &b| a.max(b.abs())).max(1e-300);
        let sym_defect = (0..n)
            .flat_map(|i| (0..i).map(move |j| (i, j)))
            .map(|(i, j)| (matrix[(i, j)] - matrix[(j, i)]).abs())
            .fold(0.0f64, f64::max);
        if sym_defect > 1e-10 * scale {
            return Err(Error::InvalidInput(format!(
                "operator matrix is not symmetric (defect {sym_defect:.3e})"
            )));
        }
        let sym = 0.5 * (&matrix + matrix.transpose());
        let eig = sym.clone().symmetric_eigen();
        let radius = eig.eigenvalues.iter().fold(0.0f64, |a, &b| a.max(b.abs()));
        if radius == 0.0 {
            return Err(Error::InvalidInput("operator matrix is identically zero".into()));
        }
        let null_thresh = null_tol * radius;
        if eig.eigenvalues.iter().any(|&l| l > null_thresh) {
            return Err(Error::InvalidInput(format!(
                "operator matrix is not negative semidefinite (max eigenvalue {:.3e})",
                eig.eigenvalues.iter().fold(f64::MIN, |a, &b| a.max(b))
            )));
        }
        let mut basis = Vec::new();
        let mut lambda0 = f64::MAX;
        for (i, &l) in eig.eigenvalues.iter().enumerate() {
            if l.abs() <= null_thresh {
                basis.push(eig.eigenvectors.column(i).iter().copied().collect());
            } else {
                lambda0 = lambda0.min(l.abs());
            }
        }
        let op = Self {
            space: WeightedSpace::standard(n),
            nullspace_basis: basis,
            kernel: Kernel::Dense {
                matrix: sym,
                eigvals: eig.eigenvalues.clone(),
                eigvecs: eig.eigenvectors,
                null_thresh,
            },
            gap: OnceLock::new(),
            c_inv_bits: AtomicU64::new(0),
        };
        if lambda0 < f64::MAX {
            let _ = op.gap.set(lambda0);
        }
        Ok(op)
    }

    pub fn dim(&self) -> usize {
        self.space.len()
    }

    /// Largest |g|/|h| seen so far across pseudoinverse applications.
    pub fn c_inv(&self) -> f64 {
        f64::from_bits(self.c_inv_bits.load(Ordering::Relaxed))
    }

    /// Spectral gap if a spectrum has been computed.
    pub fn gap(&self) -> Option<f64> {
        self.gap.get().copied()
    }

    /// Applies L to node values.
    pub fn apply(&self, g: &[f64]) -> Vec<f64> {
        assert_eq!(g.len(), self.dim(), "vector length does not match operator");
        match &self.kernel {
            Kernel::Bgk { tau } => {
                let p = self.project_null(g);
                p.iter().zip(g).map(|(pi, gi)| (pi - gi) / tau).collect()
            }
            Kernel::Dense { matrix, .. } => {
                let v = DVector::from_column_slice(g);
                (matrix * v).iter().copied().collect()
            }
        }
    }

    /// Orthogonal projection onto the nullspace in the weighted inner product.
    pub fn project_null(&self, g: &[f64]) -> Vec<f64> {
        assert_eq!(g.len(), self.dim(), "vector length does not match operator");
        let mut out = vec![0.0; g.len()];
        for e in &self.nullspace_basis {
            let c = self.space.inner(g, e);
            for (oi, ei) in out.iter_mut().zip(e) {
                *oi += c * ei;
            }
        }
        out
    }

    /// Dense matrix of L in orthonormal coordinates of the weighted space.
    fn orthonormal_matrix(&self) -> DMatrix<f64> {
        let n = self.dim();
        match &self.kernel {
            Kernel::Dense { matrix, .. } => matrix.clone(),
            Kernel::Bgk { tau } => {
                // x_hat = sqrt(d_k) x with d = w/M; then
                // Pi_hat = sum_i e_hat_i e_hat_i^T and L_hat = (Pi_hat - I)/tau.
                let diag = self.space.diag();
                let sqrt_d: Vec<f64> = diag.iter().map(|d| d.sqrt()).collect();
                let mut l = DMatrix::<f64>::zeros(n, n);
                for e in &self.nullspace_basis {
                    let eh: Vec<f64> = e.iter().zip(&sqrt_d).map(|(ei, s)| ei * s).collect();
                    for i in 0..n {
                        for j in 0..=i {
                            l[(i, j)] += eh[i] * eh[j];
                        }
                    }
                }
                for i in 0..n {
                    for j in 0..=i {
                        let mut v = l[(i, j)];
                        if i == j {
                            v -= 1.0;
                        }
                        v /= tau;
                        l[(i, j)] = v;
                        l[(j, i)] = v;
                    }
                }
                l
            }
        }
    }

    /// Dense spectrum of L in an orthonormal basis of the weighted space.
    ///
    /// Restricted to desk-scale operators; the assembled matrix is
    /// `dim x dim` dense.
    pub fn spectral_gap(&self) -> Result<SpectrumReport> {
        let n = self.dim();
        if n > 4096 {
            return Err(Error::InvalidInput(format!(
                "dense spectrum limited to 4096 nodes, operator has {n}"
            )));
        }
        let (eigvals, null_thresh) = match &self.kernel {
            Kernel::Dense { eigvals, null_thresh, .. } => (eigvals.clone(), *null_thresh),
            Kernel::Bgk { .. } => {
                let l = self.orthonormal_matrix();
                let eig = l.symmetric_eigen();
                let radius = eig.eigenvalues.iter().fold(0.0f64, |a, &b| a.max(b.abs()));
                if radius == 0.0 {
                    return Err(Error::Numerical("operator is identically zero".into()));
                }
                (eig.eigenvalues, 1e-8 * radius)
            }
        };
        let mut sorted: Vec<f64> = eigvals.iter().copied().collect();
        sorted.sort_by(f64::total_cmp);
        let nullspace_dim = sorted.iter().filter(|l| l.abs() <= null_thresh).count();
        let lambda0 = sorted
            .iter()
            .filter(|l| l.abs() > null_thresh)
            .map(|l| l.abs())
            .fold(f64::MAX, f64::min);
        if lambda0 == f64::MAX {
            return Err(Error::Numerical(
                "no nonzero eigenvalues: spectral gap undefined".into(),
            ));
        }
        let _ = self.gap.set(lambda0);
        Ok(SpectrumReport {
            eigenvalues: sorted,
            nullspace_dim,
            lambda0,
            c_inv: self.c_inv(),
        })
    }

    /// Solves L g = h on the orthogonal complement of the nullspace.
    ///
    /// Preconditions: |Pi h| <= tol.solv * |h|. Postconditions: g is
    /// orthogonal to the nullspace and |L g - (h - Pi h)| <= tol.null
    /// relative. The observed |g|/|h| feeds the `c_inv` accumulator.
    pub fn pseudoinverse_apply(&self, h: &[f64]) -> Result<Vec<f64>> {
        assert_eq!(h.len(), self.dim(), "vector length does not match operator");
        let hnorm = self.space.norm(h);
        if hnorm == 0.0 {
            return Ok(vec![0.0; h.len()]);
        }
        let ph = self.project_null(h);
        let ratio = self.space.norm(&ph) / hnorm;
        if ratio > tol::SOLV {
            return Err(Error::Solvability { ratio, tol: tol::SOLV });
        }
        let h_perp: Vec<f64> = h.iter().zip(&ph).map(|(hi, pi)| hi - pi).collect();
        let g = match &self.kernel {
            Kernel::Bgk { tau } => h_perp.iter().map(|x| -tau * x).collect::<Vec<f64>>(),
            Kernel::Dense { eigvals, eigvecs, null_thresh, .. } => {
                let hv = DVector::from_column_slice(&h_perp);
                let coords = eigvecs.transpose() * hv;
                let mut sol = DVector::zeros(h.len());
                for (i, &l) in eigvals.iter().enumerate() {
                    if l.abs() > *null_thresh {
                        sol += eigvecs.column(i) * (coords[i] / l);
                    }
                }
                sol.iter().copied().collect()
            }
        };
        let resid: Vec<f64> = self
            .apply(&g)
            .iter()
            .zip(&h_perp)
            .map(|(lg, hp)| lg - hp)
            .collect();
        let perp_norm = self.space.norm(&h_perp).max(1e-300);
        let rel = self.space.norm(&resid) / perp_norm;
        if rel > tol::NULL {
            return Err(Error::Numerical(format!(
                "pseudoinverse residual {rel:.3e} exceeds {:.1e}",
                tol::NULL
            )));
        }
        update_max(&self.c_inv_bits, self.space.norm(&g) / hnorm);
        Ok(g)
    }
}

/// Nonlinear BGK application Q(f) = (M[f] - f) / tau, cell by cell.
///
/// The result is a signed rate-of-change field, not a distribution.
pub fn bgk_apply(f: &DistField, cfg: &BgkConfig) -> Result<DistField> {
    let fields = moments(f, cfg.gas_constant)?;
    let meq = maxwellian(&fields, &f.sgrid, &f.vgrid)?;
    let values: Vec<f64> = meq
        .values
        .iter()
        .zip(&f.values)
        .map(|(m, fi)| (m - fi) / cfg.tau)
        .collect();
    Ok(DistField::unchecked(f.sgrid.clone(), f.vgrid.clone(), values))
}

/// Boltzmann H functional sum_cells dx sum_k w_k f log f, skipping
/// non-positive nodes.
///
/// Returns the value and the number of excluded phase-space points.
pub fn h_functional(f: &DistField) -> (f64, usize) {
    let dx = f.sgrid.dx();
    let mut h = 0.0;
    let mut excluded = 0;
    for cell in 0..f.n_cells() {
        for (k, &fv) in f.cell(cell).iter().enumerate() {
            if fv > 0.0 {
                h += dx * f.vgrid.weights[k] * fv * fv.ln();
            } else {
                excluded += 1;
            }
        }
    }
    (h, excluded)
}

/// Report of a pseudoinverse continuity scan along a path of macroscopic
/// states.
#[derive(Debug, Clone)]
pub struct ContinuityScan {
    /// Path parameters in [0, 1].
    pub params: Vec<f64>,
    /// Operator-norm differences of consecutive pseudoinverses, measured in
    /// the orthonormal coordinates of the path-start weighted space.
    pub diff_norms: Vec<f64>,
    /// diff_norms divided by parameter spacing.
    pub diff_quotients: Vec<f64>,
    pub max_quotient: f64,
}

/// Scans the pseudoinverse along the straight-line path between two
/// macroscopic states, confirming boundedness of the difference quotient.
///
/// Both endpoints use the same velocity grid; all operators are expressed in
/// the orthonormal coordinates of the state at parameter 0 so their
/// differences are comparable.
pub fn pseudoinverse_continuity_scan(
    state_a: (f64, [f64; 3], f64),
    state_b: (f64, [f64; 3], f64),
    dim: usize,
    vgrid: &VelocityGrid,
    cfg: &BgkConfig,
    n_params: usize,
) -> Result<ContinuityScan> {
    if n_params < 3 {
        return Err(Error::InvalidInput(format!(
            "continuity scan needs >= 3 path points, got {n_params}"
        )));
    }
    let n = vgrid.n_nodes();
    if n > 2048 {
        return Err(Error::InvalidInput(format!(
            "continuity scan assembles dense {n}x{n} matrices; limit is 2048 nodes"
        )));
    }
    let params: Vec<f64> = (0..n_params)
        .map(|i| i as f64 / (n_params - 1) as f64)
        .collect();
    // The path is stored as one fields object whose cells are the samples;
    // non-physical interpolants surface as errors from build_linearized.
    let mut u = Vec::with_capacity(n_params);
    for &s in &params {
        let mut us = [0.0; 3];
        for ax in 0..3 {
            us[ax] = (1.0 - s) * state_a.1[ax] + s * state_b.1[ax];
        }
        u.push(us);
    }
    let path = MacroFields {
        dim,
        gas_constant: cfg.gas_constant,
        rho: params.iter().map(|&s| (1.0 - s) * state_a.0 + s * state_b.0).collect(),
        u,
        temp: params.iter().map(|&s| (1.0 - s) * state_a.2 + s * state_b.2).collect(),
    };

    let op0 = build_linearized(&path, 0, vgrid, cfg)?;
    let sqrt_d0: Vec<f64> = op0.space.diag().iter().map(|d| d.sqrt()).collect();

    // Node-space pseudoinverse -tau (I - Pi_s), pushed to reference
    // orthonormal coordinates K_s = D0^(1/2) Linv_s D0^(-1/2).
    let pinv_ref = |op: &LinearizedOp| -> DMatrix<f64> {
        let tau = match op.kernel {
            Kernel::Bgk { tau } => tau,
            Kernel::Dense { .. } => unreachable!("scan builds BGK operators only"),
        };
        let mut k = DMatrix::<f64>::zeros(n, n);
        // Pi_s = sum_i e_i (d_s . e_i)^T in node space.
        let ds = op.space.diag();
        for e in &op.nullspace_basis {
            for row in 0..n {
                for col in 0..n {
                    k[(row, col)] += e[row] * ds[col] * e[col];
                }
            }
        }
        for row in 0..n {
            for col in 0..n {
                let iden = if row == col { 1.0 } else { 0.0 };
                let node_space = -tau * (iden - k[(row, col)]);
                k[(row, col)] = node_space * sqrt_d0[row] / sqrt_d0[col];
            }
        }
        k
    };

    let mut prev = pinv_ref(&op0);
    let mut diff_norms = Vec::with_capacity(n_params - 1);
    for i in 1..n_params {
        let op = build_linearized(&path, i, vgrid, cfg)?;
        let cur = pinv_ref(&op);
        let diff = &cur - &prev;
        let sv = diff.svd(false, false);
        diff_norms.push(sv.singular_values.iter().copied().fold(0.0, f64::max));
        prev = cur;
    }
    let diff_quotients: Vec<f64> = diff_norms
        .iter()
        .zip(params.windows(2))
        .map(|(d, w)| d / (w[1] - w[0]))
        .collect();
    let max_quotient = diff_quotients.iter().copied().fold(0.0, f64::max);
    Ok(ContinuityScan { params, diff_norms, diff_quotients, max_quotient })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::phase_space::SpatialGrid;
    use approx::assert_relative_eq;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;
    use std::sync::Arc;

    fn bgk_op(dim: usize, per_axis: usize, tau: f64) -> LinearizedOp {
        let fields = MacroFields::uniform(1, dim, 1.0, 1.2, [0.1, -0.05, 0.0], 0.9).unwrap();
        let vgrid =
            VelocityGrid::gauss_hermite(dim, per_axis, 1.0, 0.9, [0.1, -0.05, 0.0]).unwrap();
        let cfg = BgkConfig::new(tau, 1.0).unwrap();
        build_linearized(&fields, 0, &vgrid, &cfg).unwrap()
    }

    fn modulated_random(op: &LinearizedOp, rng: &mut impl Rng) -> Vec<f64> {
        op.space
            .maxwellian
            .iter()
            .map(|m| m * rng.random_range(-1.0..1.0))
            .collect()
    }

    #[test]
    fn nullspace_basis_is_orthonormal() {
        for dim in 1..=2 {
            let op = bgk_op(dim, 12, 0.7);
            assert_eq!(op.nullspace_basis.len(), dim + 2);
            for i in 0..op.nullspace_basis.len() {
                for j in 0..=i {
                    let want = if i == j { 1.0 } else { 0.0 };
                    let got = op.space.inner(&op.nullspace_basis[i], &op.nullspace_basis[j]);
                    assert!((got - want).abs() < 1e-12, "dim {dim}: <e{i},e{j}> = {got}");
                }
            }
        }
    }

    #[test]
    fn projector_is_idempotent_and_l_kills_invariants() {
        let op = bgk_op(2, 10, 1.3);
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let g = modulated_random(&op, &mut rng);
        let p1 = op.project_null(&g);
        let p2 = op.project_null(&p1);
        let scale = op.space.norm(&g);
        for (a, b) in p1.iter().zip(&p2) {
            assert!((a - b).abs() / scale < 1e-12);
        }
        let lp = op.apply(&p1);
        assert!(op.space.norm(&lp) / scale < 1e-12);
    }

    #[test]
    fn bgk_spectrum_has_gap_one_over_tau() {
        let tau = 0.7;
        let op = bgk_op(1, 16, tau);
        let report = op.spectral_gap().unwrap();
        assert_eq!(report.nullspace_dim, 3);
        assert_relative_eq!(report.lambda0, 1.0 / tau, epsilon = 1e-10);
        // Non-null eigenvalues are all exactly -1/tau for BGK.
        for l in report.eigenvalues.iter().take(16 - 3) {
            assert_relative_eq!(*l, -1.0 / tau, epsilon = 1e-10);
        }
        assert_eq!(op.gap(), Some(report.lambda0));
    }

    #[test]
    fn pseudoinverse_is_minus_tau_on_complement() {
        let tau = 1.9;
        let op = bgk_op(1, 14, tau);
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..20 {
            let g = modulated_random(&op, &mut rng);
            let p = op.project_null(&g);
            let h: Vec<f64> = g.iter().zip(&p).map(|(gi, pi)| gi - pi).collect();
            let sol = op.pseudoinverse_apply(&h).unwrap();
            let hnorm = op.space.norm(&h);
            for (s, hi) in sol.iter().zip(&h) {
                assert!((s + tau * hi).abs() / (hnorm * tau) < 1e-12);
            }
            // Round trip: L sol = h.
            let back = op.apply(&sol);
            let err: Vec<f64> = back.iter().zip(&h).map(|(b, hi)| b - hi).collect();
            assert!(op.space.norm(&err) / hnorm < 1e-11);
        }
        assert_relative_eq!(op.c_inv(), tau, epsilon = 1e-10);
    }

    #[test]
    fn solvability_violation_is_rejected() {
        let op = bgk_op(1, 10, 1.0);
        // The Maxwellian itself is pure nullspace.
        let h = op.space.maxwellian.clone();
        match op.pseudoinverse_apply(&h) {
            Err(Error::Solvability { ratio, .. }) => assert!(ratio > 0.9),
            other => panic!("expected solvability error, got {other:?}"),
        }
    }

    #[test]
    fn synthetic_operator_reports_prescribed_gap() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let n = 5;
        let raw = DMatrix::<f64>::from_fn(n, n, |_, _| rng.random_range(-1.0..1.0));
        let q = raw.qr().q();
        let lambda = [0.0, 0.0, 0.0, -0.6, -2.5];
        let d = DMatrix::from_diagonal(&DVector::from_row_slice(&lambda));
        let a = &q * d * q.transpose();
        let op = LinearizedOp::from_matrix(a, 1e-10).unwrap();
        let report = op.spectral_gap().unwrap();
        assert_eq!(report.nullspace_dim, 3);
        assert_relative_eq!(report.lambda0, 0.6, epsilon = 1e-10);

        // Pseudoinverse round trip on the complement.
        let h0: Vec<f64> = (0..n).map(|i| (i as f64 + 1.0).sin()).collect();
        let p = op.project_null(&h0);
        let h: Vec<f64> = h0.iter().zip(&p).map(|(a, b)| a - b).collect();
        let g = op.pseudoinverse_apply(&h).unwrap();
        let back = op.apply(&g);
        for (b, hi) in back.iter().zip(&h) {
            assert!((b - hi).abs() < 1e-10);
        }
        // c_inv bounded by 1/lambda0.
        assert!(op.c_inv() <= 1.0 / 0.6 + 1e-12);
    }

    #[test]
    fn synthetic_rejects_asymmetric_and_indefinite() {
        let a = DMatrix::from_row_slice(2, 2, &[-1.0, 0.5, -0.5, -1.0]);
        assert!(matches!(LinearizedOp::from_matrix(a, 1e-10), Err(Error::InvalidInput(_))));
        let b = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, -1.0]);
        assert!(matches!(LinearizedOp::from_matrix(b, 1e-10), Err(Error::InvalidInput(_))));
    }

    #[test]
    fn degenerate_grid_gives_ill_conditioned_basis() {
        let fields = MacroFields::uniform(1, 1, 1.0, 1.0, [0.0; 3], 1.0).unwrap();
        let vgrid = VelocityGrid {
            dim: 1,
            kind: crate::phase_space::GridKind::UniformTruncated { per_axis: 4, half_width: 1.0 },
            nodes: vec![[0.3, 0.0, 0.0]; 4],
            weights: vec![0.25; 4],
        };
        let cfg = BgkConfig::new(1.0, 1.0).unwrap();
        match build_linearized(&fields, 0, &vgrid, &cfg) {
            Err(Error::IllConditioned { .. }) => {}
            other => panic!("expected ill-conditioned error, got {other:?}"),
        }
    }

    #[test]
    fn bgk_apply_vanishes_on_maxwellian() {
        let sgrid = Arc::new(SpatialGrid::new(4, 1.0, 0).unwrap());
        let vgrid = Arc::new(VelocityGrid::solver_grid(1, 32, 1.0, 1.0, 1.2).unwrap());
        let fields = MacroFields::uniform(4, 1, 1.0, 1.4, [0.2, 0.0, 0.0], 1.0).unwrap();
        let f = maxwellian(&fields, &sgrid, &vgrid).unwrap();
        let q = bgk_apply(&f, &BgkConfig::new(0.5, 1.0).unwrap()).unwrap();
        let scale = f.values.iter().cloned().fold(0.0, f64::max);
        for v in &q.values {
            assert!(v.abs() < 1e-12 * scale);
        }
    }

    #[test]
    fn bgk_apply_conserves_discrete_invariants() {
        let sgrid = Arc::new(SpatialGrid::new(4, 1.0, 0).unwrap());
        let vgrid = Arc::new(VelocityGrid::solver_grid(1, 32, 1.0, 1.0, 1.2).unwrap());
        let fields = MacroFields::uniform(4, 1, 1.0, 1.0, [0.0; 3], 1.0).unwrap();
        let m = maxwellian(&fields, &sgrid, &vgrid).unwrap();
        // Perturb away from equilibrium, keeping positivity.
        let f = DistField::new(
            sgrid,
            vgrid.clone(),
            m.values
                .iter()
                .enumerate()
                .map(|(i, v)| v * (1.0 + 0.3 * ((i % 7) as f64 - 3.0) / 3.0))
                .collect(),
        )
        .unwrap();
        let q = bgk_apply(&f, &BgkConfig::new(1.0, 1.0).unwrap()).unwrap();
        for cell in 0..4 {
            let (mass, mom, energy) = crate::phase_space::node_moments(q.cell(cell), &vgrid);
            assert!(mass.abs() < 1e-12, "mass rate {mass}");
            assert!(mom[0].abs() < 1e-12, "momentum rate {}", mom[0]);
            assert!(energy.abs() < 1e-12, "energy rate {energy}");
        }
    }

    #[test]
    fn h_functional_matches_maxwellian_closed_form() {
        // integral M log M = rho (log(rho / (2 pi R T)^(d/2)) - d/2).
        let sgrid = Arc::new(SpatialGrid::new(8, 2.0, 0).unwrap());
        let vgrid = Arc::new(VelocityGrid::solver_grid(1, 48, 1.0, 0.8, 1.2).unwrap());
        let (rho, t) = (1.7, 0.8);
        let fields = MacroFields::uniform(8, 1, 1.0, rho, [0.0; 3], t).unwrap();
        let f = maxwellian(&fields, &sgrid, &vgrid).unwrap();
        let (h, excluded) = h_functional(&f);
        assert_eq!(excluded, 0);
        let per_vol = rho * ((rho / (2.0 * std::f64::consts::PI * t).sqrt()).ln() - 0.5);
        assert_relative_eq!(h, per_vol * 2.0, epsilon = 1e-10);
    }

    #[test]
    fn continuity_scan_has_bounded_quotient() {
        let vgrid = VelocityGrid::solver_grid(1, 24, 1.0, 1.2, 1.2).unwrap();
        let cfg = BgkConfig::new(0.9, 1.0).unwrap();
        let scan = pseudoinverse_continuity_scan(
            (1.0, [0.0; 3], 1.0),
            (1.3, [0.15, 0.0, 0.0], 1.2),
            1,
            &vgrid,
            &cfg,
            9,
        )
        .unwrap();
        assert_eq!(scan.diff_norms.len(), 8);
        assert!(scan.max_quotient.is_finite());
        // Differences should be roughly uniform along a straight path, so the
        // max quotient should not exceed a few times the mean.
        let mean = scan.diff_quotients.iter().sum::<f64>() / scan.diff_quotients.len() as f64;
        assert!(scan.max_quotient < 5.0 * mean, "max {} mean {mean}", scan.max_quotient);
    }

    #[test]
    fn continuity_scan_rejects_path_through_vacuum() {
        let vgrid = VelocityGrid::solver_grid(1, 16, 1.0, 1.0, 1.2).unwrap();
        let cfg = BgkConfig::new(1.0, 1.0).unwrap();
        match pseudoinverse_continuity_scan(
            (1.0, [0.0; 3], 1.0),
            (1.0, [0.0; 3], -0.5),
            1,
            &vgrid,
            &cfg,
            9,
        ) {
            Err(Error::NonPhysical { .. }) => {}
            other => panic!("expected non-physical path point, got {other:?}"),
        }
    }
}
