//! Chapman-Enskog first correction for the BGK model.
//!
//! With time derivatives of the macroscopic fields eliminated through the
//! compressible Euler system, the streaming term applied to the local
//! Maxwellian collapses to a closed form in the peculiar velocity C = v - u:
//!
//! (d_t + v . grad_x) M
//!   = M [ (|C|^2/(2RT) - (d+2)/2) (C . grad T)/T
//!       + (1/(RT)) (C (x) C - |C|^2/d I) : grad u ].
//!
//! Density gradients cancel identically, so only temperature gradients and
//! the trace-free velocity-gradient part force the first correction
//! f1 = L^-1(streaming term) = -tau * streaming term for BGK. Its deviatoric
//! second moment reproduces the Navier-Stokes law tau1 = -2 mu S with
//! mu = rho tau R T (Chapman & Cowling, The Mathematical Theory of
//! Non-Uniform Gases).
//!
//! Spatial derivatives use the trigonometric differentiation matrix by
//! default, with a fourth-order centered fallback. Velocity integrals default
//! to per-cell Gauss-Hermite grids centered at the local (u, T), which makes
//! the moment identities exact and the co-moving node values independent of
//! the bulk velocity.

use std::sync::Arc;

use crate::collision::{build_linearized, BgkConfig, LinearizedOp};
use crate::error::{Error, Result};
use crate::linalg::{periodic_derivative, DerivScheme};
use crate::phase_space::{
    centered_second_moment, maxwellian_cell, MacroFields, QuadSpec, SpatialGrid, VelocityGrid,
};

/// Spatial derivatives of the fields along the grid axis.
#[derive(Debug, Clone)]
pub struct Gradients {
    pub drho: Vec<f64>,
    /// Axis-derivative of each bulk-velocity component.
    pub du: Vec<[f64; 3]>,
    pub dtemp: Vec<f64>,
}

/// Computes axis-derivatives of rho, u, T on the periodic grid.
pub fn gradients(fields: &MacroFields, sgrid: &SpatialGrid, scheme: DerivScheme) -> Result<Gradients> {
    if fields.n_cells() != sgrid.n_cells {
        return Err(Error::InvalidInput(format!(
            "fields have {} cells, grid has {}",
            fields.n_cells(),
            sgrid.n_cells
        )));
    }
    if sgrid.axis >= fields.dim {
        return Err(Error::InvalidInput(format!(
            "spatial axis {} outside velocity dimension {}",
            sgrid.axis, fields.dim
        )));
    }
    let drho = periodic_derivative(&fields.rho, sgrid.length, scheme);
    let dtemp = periodic_derivative(&fields.temp, sgrid.length, scheme);
    let mut du = vec![[0.0; 3]; fields.n_cells()];
    for ax in 0..fields.dim {
        let comp: Vec<f64> = fields.u.iter().map(|u| u[ax]).collect();
        let d = periodic_derivative(&comp, sgrid.length, scheme);
        for (cell, val) in d.into_iter().enumerate() {
            du[cell][ax] = val;
        }
    }
    Ok(Gradients { drho, du, dtemp })
}

/// Trace-free symmetric strain rate S and divergence per cell.
#[derive(Debug, Clone)]
pub struct StrainRate {
    pub dim: usize,
    /// S_ij = (d_i u_j + d_j u_i)/2 - (div u / d) delta_ij.
    pub s: Vec<[[f64; 3]; 3]>,
    pub div_u: Vec<f64>,
}

/// Builds the strain rate from axis-gradients: only d/dx_axis is nonzero on
/// this grid family.
pub fn strain_rate(fields: &MacroFields, sgrid: &SpatialGrid, grads: &Gradients) -> StrainRate {
    let d = fields.dim;
    let axis = sgrid.axis;
    let mut s = Vec::with_capacity(fields.n_cells());
    let mut div_u = Vec::with_capacity(fields.n_cells());
    for cell in 0..fields.n_cells() {
        let du = &grads.du[cell];
        let div = du[axis];
        let mut sc = [[0.0; 3]; 3];
        for i in 0..d {
            for j in 0..d {
                let grad_ij = if i == axis { du[j] } else { 0.0 };
                let grad_ji = if j == axis { du[i] } else { 0.0 };
                sc[i][j] = 0.5 * (grad_ij + grad_ji);
                if i == j {
                    sc[i][j] -= div / d as f64;
                }
            }
        }
        s.push(sc);
        div_u.push(div);
    }
    StrainRate { dim: d, s, div_u }
}

/// Euler right-hand sides (d_t rho, d_t u, d_t T) for the 1-D-in-space
/// compressible system with p = rho R T and monatomic closure
/// d_t T + u . grad T + (2/d) T div u = 0.
///
/// This is the time-derivative substitution behind the closed-form streaming
/// term; exposed so finite-difference oracles can replay it.
pub fn euler_rhs(
    fields: &MacroFields,
    sgrid: &SpatialGrid,
    grads: &Gradients,
) -> (Vec<f64>, Vec<[f64; 3]>, Vec<f64>) {
    let d = fields.dim as f64;
    let axis = sgrid.axis;
    let r = fields.gas_constant;
    let n = fields.n_cells();
    let mut drho_dt = Vec::with_capacity(n);
    let mut du_dt = vec![[0.0; 3]; n];
    let mut dtemp_dt = Vec::with_capacity(n);
    for cell in 0..n {
        let ua = fields.u[cell][axis];
        let rho = fields.rho[cell];
        let temp = fields.temp[cell];
        let g = grads;
        drho_dt.push(-(ua * g.drho[cell] + rho * g.du[cell][axis]));
        let dp = r * (temp * g.drho[cell] + rho * g.dtemp[cell]);
        for j in 0..fields.dim {
            du_dt[cell][j] = -ua * g.du[cell][j] - if j == axis { dp / rho } else { 0.0 };
        }
        dtemp_dt.push(-ua * g.dtemp[cell] - (2.0 / d) * temp * g.du[cell][axis]);
    }
    (drho_dt, du_dt, dtemp_dt)
}

/// Streaming term (d_t + v . grad_x) M per cell, as node values on per-cell
/// or shared velocity grids.
#[derive(Debug, Clone)]
pub struct StreamingTerm {
    pub values: Vec<Vec<f64>>,
    /// Velocity grid of each cell (all clones of one Arc when shared).
    pub grids: Vec<Arc<VelocityGrid>>,
    pub gradients: Gradients,
}

fn streaming_cell(
    fields: &MacroFields,
    cell: usize,
    grads: &Gradients,
    axis: usize,
    vgrid: &VelocityGrid,
    m: &[f64],
) -> Vec<f64> {
    let d = fields.dim;
    let rt = fields.gas_constant * fields.temp[cell];
    let u = &fields.u[cell];
    let dtemp = grads.dtemp[cell];
    let du = &grads.du[cell];
    let temp = fields.temp[cell];
    vgrid
        .nodes
        .iter()
        .zip(m)
        .map(|(node, mk)| {
            let mut c = [0.0; 3];
            let mut c2 = 0.0;
            for ax in 0..d {
                c[ax] = node[ax] - u[ax];
                c2 += c[ax] * c[ax];
            }
            let thermal = (c2 / (2.0 * rt) - (d as f64 + 2.0) / 2.0) * c[axis] * dtemp / temp;
            let mut c_du = 0.0;
            for ax in 0..d {
                c_du += c[ax] * du[ax];
            }
            let shear = (c[axis] * c_du - c2 / d as f64 * du[axis]) / rt;
            mk * (thermal + shear)
        })
        .collect()
}

fn transport_cell(
    fields: &MacroFields,
    cell: usize,
    grads: &Gradients,
    axis: usize,
    vgrid: &VelocityGrid,
    m: &[f64],
) -> Vec<f64> {
    // v . grad_x M without the Euler time-derivative substitution:
    // v_a M [ drho/rho + (C . du)/(RT) + (|C|^2/(2RT) - d/2) dT/T ].
    let d = fields.dim;
    let rt = fields.gas_constant * fields.temp[cell];
    let u = &fields.u[cell];
    vgrid
        .nodes
        .iter()
        .zip(m)
        .map(|(node, mk)| {
            let mut c = [0.0; 3];
            let mut c2 = 0.0;
            let mut c_du = 0.0;
            for ax in 0..d {
                c[ax] = node[ax] - u[ax];
                c2 += c[ax] * c[ax];
                c_du += c[ax] * grads.du[cell][ax];
            }
            let log_deriv = grads.drho[cell] / fields.rho[cell]
                + c_du / rt
                + (c2 / (2.0 * rt) - d as f64 / 2.0) * grads.dtemp[cell] / fields.temp[cell];
            node[axis] * mk * log_deriv
        })
        .collect()
}

fn assemble_term(
    fields: &MacroFields,
    sgrid: &SpatialGrid,
    quad: &QuadSpec,
    scheme: DerivScheme,
    per_cell: impl Fn(&MacroFields, usize, &Gradients, usize, &VelocityGrid, &[f64]) -> Vec<f64>,
) -> Result<StreamingTerm> {
    fields.validate()?;
    let grads = gradients(fields, sgrid, scheme)?;
    let mut values = Vec::with_capacity(fields.n_cells());
    let mut grids = Vec::with_capacity(fields.n_cells());
    for cell in 0..fields.n_cells() {
        let vgrid = quad.grid_for(fields, cell)?;
        let m = maxwellian_cell(fields, cell, &vgrid)?;
        values.push(per_cell(fields, cell, &grads, sgrid.axis, &vgrid, &m));
        grids.push(vgrid);
    }
    Ok(StreamingTerm { values, grids, gradients: grads })
}

/// Closed-form streaming term with Euler-substituted time derivatives.
pub fn streaming_term(
    fields: &MacroFields,
    sgrid: &SpatialGrid,
    quad: QuadSpec,
    scheme: DerivScheme,
) -> Result<StreamingTerm> {
    assemble_term(fields, sgrid, &quad, scheme, streaming_cell)
}

/// Pure transport term v . grad_x M, i.e. the streaming term with the
/// time-derivative substitution omitted. Exists to demonstrate that
/// solvability fails without it.
pub fn transport_term(
    fields: &MacroFields,
    sgrid: &SpatialGrid,
    quad: QuadSpec,
    scheme: DerivScheme,
) -> Result<StreamingTerm> {
    assemble_term(fields, sgrid, &quad, scheme, transport_cell)
}

/// Per-cell solvability diagnostics for a right-hand side of L g = h.
#[derive(Debug, Clone)]
pub struct SolvabilityReport {
    /// |Pi h| / |h| per cell in the local weighted norm (0 for h = 0).
    pub per_cell: Vec<f64>,
    pub max_ratio: f64,
    pub worst_cell: usize,
}

impl SolvabilityReport {
    pub fn passes(&self, tol: f64) -> bool {
        self.max_ratio <= tol
    }
}

/// Measures the nullspace content of the streaming term cell by cell.
pub fn solvability_check(
    st: &StreamingTerm,
    fields: &MacroFields,
    cfg: &BgkConfig,
) -> Result<SolvabilityReport> {
    let mut per_cell = Vec::with_capacity(st.values.len());
    let mut max_ratio = 0.0f64;
    let mut worst_cell = 0;
    for cell in 0..st.values.len() {
        let op = build_linearized(fields, cell, &st.grids[cell], cfg)?;
        let h = &st.values[cell];
        let hnorm = op.space.norm(h);
        let ratio = if hnorm > 0.0 {
            op.space.norm(&op.project_null(h)) / hnorm
        } else {
            0.0
        };
        if ratio > max_ratio {
            max_ratio = ratio;
            worst_cell = cell;
        }
        per_cell.push(ratio);
    }
    Ok(SolvabilityReport { per_cell, max_ratio, worst_cell })
}

/// First Chapman-Enskog correction and its stress moment.
#[derive(Debug, Clone)]
pub struct FirstCorrection {
    /// Node values of f1 per cell, on the grids of the originating term.
    pub f1: Vec<Vec<f64>>,
    /// Weighted norm |f1|_{L2(M^-1)} per cell.
    pub f1_norms: Vec<f64>,
    /// Deviatoric stress tau1_ij = int C_i C_j f1 dv, trace removed.
    pub tau1: Vec<[[f64; 3]; 3]>,
    /// Dynamic viscosity mu = rho tau R T per cell.
    pub mu: Vec<f64>,
}

impl FirstCorrection {
    pub fn max_f1_norm(&self) -> f64 {
        self.f1_norms.iter().copied().fold(0.0, f64::max)
    }

    pub fn max_abs_tau1(&self) -> f64 {
        self.tau1
            .iter()
            .flat_map(|t| t.iter().flatten())
            .fold(0.0f64, |a, &b| a.max(b.abs()))
    }
}

/// Solves L f1 = streaming term per cell through the pseudoinverse; for BGK
/// this is f1 = -tau * streaming term on the complement. The deviatoric
/// moment and local viscosity are assembled alongside.
pub fn first_correction(
    st: &StreamingTerm,
    fields: &MacroFields,
    cfg: &BgkConfig,
) -> Result<FirstCorrection> {
    let d = fields.dim;
    let n_cells = st.values.len();
    if n_cells != fields.n_cells() {
        return Err(Error::InvalidInput(
            "streaming term and fields disagree in cell count".into(),
        ));
    }
    let mut f1 = Vec::with_capacity(n_cells);
    let mut f1_norms = Vec::with_capacity(n_cells);
    let mut tau1 = Vec::with_capacity(n_cells);
    let mut mu = Vec::with_capacity(n_cells);
    for cell in 0..n_cells {
        let vgrid = &st.grids[cell];
        let op = build_linearized(fields, cell, vgrid, cfg)?;
        let g = op.pseudoinverse_apply(&st.values[cell])?;
        f1_norms.push(op.space.norm(&g));
        let mut p = centered_second_moment(&g, &fields.u[cell], vgrid);
        let trace: f64 = (0..d).map(|i| p[i][i]).sum();
        for (i, row) in p.iter_mut().enumerate().take(d) {
            row[i] -= trace / d as f64;
        }
        tau1.push(p);
        mu.push(fields.rho[cell] * cfg.tau * fields.gas_constant * fields.temp[cell]);
        f1.push(g);
    }
    Ok(FirstCorrection { f1, f1_norms, tau1, mu })
}

/// Comparison of the measured deviatoric stress against -2 mu S.
#[derive(Debug, Clone)]
pub struct ConstitutiveReport {
    /// Componentwise |tau1 + 2 mu S| per cell.
    pub abs_err: Vec<[[f64; 3]; 3]>,
    /// Largest |2 mu S| component over all cells; 0 means vanishing strain.
    pub scale: f64,
    /// Max abs error divided by `scale` (absolute error if scale is 0).
    pub max_rel_err: f64,
    pub worst_cell: usize,
    pub mu: Vec<f64>,
}

/// Verifies tau1 = -2 mu S componentwise across cells.
pub fn constitutive_verify(
    fc: &FirstCorrection,
    strain: &StrainRate,
    fields: &MacroFields,
) -> Result<ConstitutiveReport> {
    let d = fields.dim;
    let n_cells = fields.n_cells();
    if fc.tau1.len() != n_cells || strain.s.len() != n_cells {
        return Err(Error::InvalidInput(
            "correction, strain, and fields disagree in cell count".into(),
        ));
    }
    let mut scale = 0.0f64;
    for cell in 0..n_cells {
        for i in 0..d {
            for j in 0..d {
                scale = scale.max((2.0 * fc.mu[cell] * strain.s[cell][i][j]).abs());
            }
        }
    }
    let mut abs_err = Vec::with_capacity(n_cells);
    let mut max_abs = 0.0f64;
    let mut worst_cell = 0;
    for cell in 0..n_cells {
        let mut e = [[0.0; 3]; 3];
        for i in 0..d {
            for j in 0..d {
                e[i][j] = (fc.tau1[cell][i][j] + 2.0 * fc.mu[cell] * strain.s[cell][i][j]).abs();
                if e[i][j] > max_abs {
                    max_abs = e[i][j];
                    worst_cell = cell;
                }
            }
        }
        abs_err.push(e);
    }
    let max_rel_err = if scale > 0.0 { max_abs / scale } else { max_abs };
    Ok(ConstitutiveReport { abs_err, scale, max_rel_err, worst_cell, mu: fc.mu.clone() })
}

/// Canonical transverse shear field: u_axis+1 component is sinusoidal in the
/// grid coordinate, rho and T uniform. With axis = 1 and d = 2 this is
/// u = (a sin(2 pi y / L), 0).
pub fn shear_fields(
    sgrid: &SpatialGrid,
    dim: usize,
    gas_constant: f64,
    amplitude: f64,
    rho: f64,
    temp: f64,
) -> Result<MacroFields> {
    if dim < 2 {
        return Err(Error::InvalidInput(
            "a transverse shear field needs velocity dimension >= 2".into(),
        ));
    }
    if sgrid.axis >= dim {
        return Err(Error::InvalidInput(format!(
            "spatial axis {} outside velocity dimension {dim}",
            sgrid.axis
        )));
    }
    // Flow along the first non-axis direction.
    let flow_dir = (0..dim).find(|ax| *ax != sgrid.axis).unwrap();
    let k = 2.0 * std::f64::consts::PI / sgrid.length;
    MacroFields::from_profiles(sgrid, dim, gas_constant, |x| {
        let mut u = [0.0; 3];
        u[flow_dir] = amplitude * (k * x).sin();
        (rho, u, temp)
    })
}
