//! Phase-space discretization: velocity quadrature grids, periodic spatial
//! grids, macroscopic fields, and distribution storage.
//!
//! Velocity space is d-dimensional (d <= 3) and discretized either by a
//! tensorized Gauss-Hermite rule scaled to a reference Maxwellian (exact
//! low-order moments by construction) or by a uniform truncated grid with
//! midpoint weights (spectrally accurate for Maxwellian-modulated integrands,
//! robust when the temperature varies across cells). Physical space is a
//! single periodic coordinate embedded along one velocity axis, which is
//! enough for the 1-D-in-space verification runs this crate targets.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::linalg;

/// Floor below which a density or temperature counts as degenerate.
const DEGENERATE_FLOOR: f64 = 1e-300;

/// How a velocity grid was constructed.
#[derive(Debug, Clone, PartialEq)]
pub enum GridKind {
    /// Tensorized Gauss-Hermite rule scaled by sqrt(2 R T_ref) about u_ref.
    GaussHermite { per_axis: usize, r: f64, t_ref: f64, u_ref: [f64; 3] },
    /// Tensorized midpoint rule on [-half_width, half_width]^d.
    UniformTruncated { per_axis: usize, half_width: f64 },
}

/// Discrete velocity grid with quadrature weights.
///
/// `sum_k weights[k] * g(nodes[k])` approximates the velocity integral of g;
/// it is exact for polynomials times the reference Maxwellian on the
/// Gauss-Hermite variant.
#[derive(Debug, Clone, PartialEq)]
pub struct VelocityGrid {
    pub dim: usize,
    pub kind: GridKind,
    /// Node coordinates; components beyond `dim` are zero.
    pub nodes: Vec<[f64; 3]>,
    pub weights: Vec<f64>,
}

/// Half-width of the solver grid in units of the thermal speed, before the
/// safety factor.
pub const SOLVER_SPAN_SIGMAS: f64 = 8.0;
/// Default multiplicative margin on the solver grid half-width.
pub const SOLVER_SAFETY: f64 = 1.2;

fn check_dim(dim: usize) -> Result<()> {
    if !(1..=3).contains(&dim) {
        return Err(Error::InvalidInput(format!(
            "velocity dimension must be 1, 2, or 3, got {dim}"
        )));
    }
    Ok(())
}

fn tensorize(dim: usize, axis_nodes: &[f64], axis_weights: &[f64]) -> (Vec<[f64; 3]>, Vec<f64>) {
    let n = axis_nodes.len();
    let total = n.pow(dim as u32);
    let mut nodes = Vec::with_capacity(total);
    let mut weights = Vec::with_capacity(total);
    for flat in 0..total {
        let mut idx = flat;
        let mut node = [0.0; 3];
        let mut w = 1.0;
        for ax in (0..dim).rev() {
            let i = idx % n;
            idx /= n;
            node[ax] = axis_nodes[i];
            w *= axis_weights[i];
        }
        nodes.push(node);
        weights.push(w);
    }
    (nodes, weights)
}

impl VelocityGrid {
    /// Tensorized Gauss-Hermite grid matched to the Maxwellian with the given
    /// reference temperature and bulk velocity.
    pub fn gauss_hermite(
        dim: usize,
        per_axis: usize,
        r: f64,
        t_ref: f64,
        u_ref: [f64; 3],
    ) -> Result<Self> {
        check_dim(dim)?;
        if per_axis < 3 {
            return Err(Error::InvalidInput(format!(
                "Gauss-Hermite grid needs >= 3 nodes per axis for exact low-order moments, got {per_axis}"
            )));
        }
        if r <= 0.0 || t_ref <= 0.0 {
            return Err(Error::InvalidInput(format!(
                "gas constant and reference temperature must be positive, got R = {r}, T = {t_ref}"
            )));
        }
        let rule = linalg::gauss_hermite(per_axis);
        let scale = (2.0 * r * t_ref).sqrt();
        // Absorb the Hermite weight so that sum w g(v) integrates g directly:
        // v = u + scale x, w = w_gh exp(x^2) scale.
        let axis_weights: Vec<f64> = rule
            .nodes
            .iter()
            .zip(&rule.weights)
            .map(|(x, w)| w * (x * x).exp() * scale)
            .collect();
        // All axes share the standardized nodes; shift each axis by u_ref.
        let (mut nodes, weights) = tensorize(dim, &rule.nodes, &axis_weights);
        for node in &mut nodes {
            for ax in 0..dim {
                node[ax] = u_ref[ax] + scale * node[ax];
            }
        }
        Ok(Self {
            dim,
            kind: GridKind::GaussHermite { per_axis, r, t_ref, u_ref },
            nodes,
            weights,
        })
    }

    /// Uniform cell-centered grid on [-half_width, half_width] per axis with
    /// midpoint quadrature weights.
    pub fn uniform(dim: usize, per_axis: usize, half_width: f64) -> Result<Self> {
        check_dim(dim)?;
        if per_axis < 4 {
            return Err(Error::InvalidInput(format!(
                "uniform velocity grid needs >= 4 nodes per axis, got {per_axis}"
            )));
        }
        if !(half_width > 0.0 && half_width.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "uniform grid half-width must be positive and finite, got {half_width}"
            )));
        }
        let h = 2.0 * half_width / per_axis as f64;
        let axis_nodes: Vec<f64> = (0..per_axis)
            .map(|i| -half_width + (i as f64 + 0.5) * h)
            .collect();
        let axis_weights = vec![h; per_axis];
        let (nodes, weights) = tensorize(dim, &axis_nodes, &axis_weights);
        Ok(Self {
            dim,
            kind: GridKind::UniformTruncated { per_axis, half_width },
            nodes,
            weights,
        })
    }

    /// Uniform solver grid sized for temperatures up to `t_max`: half-width
    /// `SOLVER_SPAN_SIGMAS * safety * sqrt(R t_max)`.
    pub fn solver_grid(dim: usize, per_axis: usize, r: f64, t_max: f64, safety: f64) -> Result<Self> {
        if r <= 0.0 || t_max <= 0.0 || safety < 1.0 {
            return Err(Error::InvalidInput(format!(
                "solver grid needs R > 0, t_max > 0, safety >= 1, got R = {r}, t_max = {t_max}, safety = {safety}"
            )));
        }
        Self::uniform(dim, per_axis, SOLVER_SPAN_SIGMAS * safety * (r * t_max).sqrt())
    }

    pub fn n_nodes(&self) -> usize {
        self.nodes.len()
    }

    /// Largest absolute node component, the speed that drives the CFL limit.
    pub fn max_speed(&self) -> f64 {
        self.nodes
            .iter()
            .flat_map(|n| n.iter().take(self.dim))
            .fold(0.0, |acc, v| acc.max(v.abs()))
    }
}

/// Periodic 1-D spatial grid whose coordinate runs along velocity axis `axis`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpatialGrid {
    pub n_cells: usize,
    pub length: f64,
    /// Which of the d space/velocity directions the coordinate varies along.
    pub axis: usize,
}

impl SpatialGrid {
    pub fn new(n_cells: usize, length: f64, axis: usize) -> Result<Self> {
        if n_cells < 4 {
            return Err(Error::InvalidInput(format!(
                "spatial grid needs >= 4 cells, got {n_cells}"
            )));
        }
        if !(length > 0.0 && length.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "domain length must be positive and finite, got {length}"
            )));
        }
        if axis > 2 {
            return Err(Error::InvalidInput(format!("spatial axis must be < 3, got {axis}")));
        }
        Ok(Self { n_cells, length, axis })
    }

    pub fn dx(&self) -> f64 {
        self.length / self.n_cells as f64
    }

    pub fn cell_centers(&self) -> Vec<f64> {
        let dx = self.dx();
        (0..self.n_cells).map(|j| (j as f64 + 0.5) * dx).collect()
    }
}

/// Macroscopic fields (density, bulk velocity, temperature) on a spatial grid,
/// together with the gas constant they were extracted with.
#[derive(Debug, Clone, PartialEq)]
pub struct MacroFields {
    pub dim: usize,
    pub gas_constant: f64,
    pub rho: Vec<f64>,
    /// Bulk velocity per cell; components beyond `dim` are zero.
    pub u: Vec<[f64; 3]>,
    pub temp: Vec<f64>,
}

impl MacroFields {
    /// Spatially uniform fields.
    pub fn uniform(
        n_cells: usize,
        dim: usize,
        gas_constant: f64,
        rho: f64,
        u: [f64; 3],
        temp: f64,
    ) -> Result<Self> {
        let f = Self {
            dim,
            gas_constant,
            rho: vec![rho; n_cells],
            u: vec![u; n_cells],
            temp: vec![temp; n_cells],
        };
        f.validate()?;
        Ok(f)
    }

    /// Builds fields cell by cell from profiles of the cell-center coordinate.
    pub fn from_profiles(
        grid: &SpatialGrid,
        dim: usize,
        gas_constant: f64,
        profile: impl Fn(f64) -> (f64, [f64; 3], f64),
    ) -> Result<Self> {
        let centers = grid.cell_centers();
        let mut rho = Vec::with_capacity(centers.len());
        let mut u = Vec::with_capacity(centers.len());
        let mut temp = Vec::with_capacity(centers.len());
        for &x in &centers {
            let (r, uu, t) = profile(x);
            rho.push(r);
            u.push(uu);
            temp.push(t);
        }
        let f = Self { dim, gas_constant, rho, u, temp };
        f.validate()?;
        Ok(f)
    }

    pub fn n_cells(&self) -> usize {
        self.rho.len()
    }

    /// Checks positivity and shape; identifies the first offending cell.
    pub fn validate(&self) -> Result<()> {
        check_dim(self.dim)?;
        if self.gas_constant <= 0.0 || !self.gas_constant.is_finite() {
            return Err(Error::InvalidInput(format!(
                "gas constant must be positive and finite, got {}",
                self.gas_constant
            )));
        }
        if self.rho.len() != self.u.len() || self.rho.len() != self.temp.len() {
            return Err(Error::InvalidInput(format!(
                "field component lengths disagree: rho {}, u {}, T {}",
                self.rho.len(),
                self.u.len(),
                self.temp.len()
            )));
        }
        for cell in 0..self.rho.len() {
            if !(self.rho[cell] > DEGENERATE_FLOOR && self.rho[cell].is_finite()) {
                return Err(Error::NonPhysical {
                    cell,
                    what: format!("density {}", self.rho[cell]),
                });
            }
            if !(self.temp[cell] > DEGENERATE_FLOOR && self.temp[cell].is_finite()) {
                return Err(Error::NonPhysical {
                    cell,
                    what: format!("temperature {}", self.temp[cell]),
                });
            }
            if self.u[cell].iter().any(|c| !c.is_finite()) {
                return Err(Error::NonPhysical {
                    cell,
                    what: "non-finite bulk velocity".into(),
                });
            }
        }
        Ok(())
    }

    pub fn max_temp(&self) -> f64 {
        self.temp.iter().copied().fold(f64::MIN, f64::max)
    }
}

/// Distribution values on the product of a spatial and a velocity grid,
/// stored row-major as (cell, node).
#[derive(Debug, Clone)]
pub struct DistField {
    pub sgrid: Arc<SpatialGrid>,
    pub vgrid: Arc<VelocityGrid>,
    pub values: Vec<f64>,
}

impl DistField {
    /// Validating constructor: shape must match the grids and values must be
    /// finite and nonnegative. During evolution, negativity is only monitored
    /// (see [`DistField::negative_fraction`]), but initial data must be clean.
    pub fn new(sgrid: Arc<SpatialGrid>, vgrid: Arc<VelocityGrid>, values: Vec<f64>) -> Result<Self> {
        if values.len() != sgrid.n_cells * vgrid.n_nodes() {
            return Err(Error::InvalidInput(format!(
                "distribution has {} values, expected {} cells x {} nodes",
                values.len(),
                sgrid.n_cells,
                vgrid.n_nodes()
            )));
        }
        if let Some(pos) = values.iter().position(|v| !v.is_finite() || *v < 0.0) {
            let n = vgrid.n_nodes();
            return Err(Error::InvalidInput(format!(
                "initial distribution is negative or non-finite at cell {}, node {}: {}",
                pos / n,
                pos % n,
                values[pos]
            )));
        }
        Ok(Self { sgrid, vgrid, values })
    }

    /// Constructor for intermediate solver states, where small negative
    /// values from dispersive advection are tolerated and only monitored.
    pub(crate) fn unchecked(
        sgrid: Arc<SpatialGrid>,
        vgrid: Arc<VelocityGrid>,
        values: Vec<f64>,
    ) -> Self {
        debug_assert_eq!(values.len(), sgrid.n_cells * vgrid.n_nodes());
        Self { sgrid, vgrid, values }
    }

    pub fn from_fn(
        sgrid: Arc<SpatialGrid>,
        vgrid: Arc<VelocityGrid>,
        mut f: impl FnMut(usize, usize) -> f64,
    ) -> Result<Self> {
        let n = vgrid.n_nodes();
        let values: Vec<f64> = (0..sgrid.n_cells * n).map(|i| f(i / n, i % n)).collect();
        Self::new(sgrid, vgrid, values)
    }

    pub fn n_cells(&self) -> usize {
        self.sgrid.n_cells
    }

    pub fn n_nodes(&self) -> usize {
        self.vgrid.n_nodes()
    }

    pub fn cell(&self, c: usize) -> &[f64] {
        let n = self.n_nodes();
        &self.values[c * n..(c + 1) * n]
    }

    pub fn cell_mut(&mut self, c: usize) -> &mut [f64] {
        let n = self.n_nodes();
        &mut self.values[c * n..(c + 1) * n]
    }

    /// Fraction of phase-space points with negative values.
    pub fn negative_fraction(&self) -> f64 {
        let neg = self.values.iter().filter(|v| **v < 0.0).count();
        neg as f64 / self.values.len() as f64
    }
}

/// Local Maxwellian value at one velocity node.
///
/// M = rho / (2 pi R T)^(d/2) * exp(-|v - u|^2 / (2 R T)).
pub fn maxwellian_at(dim: usize, r: f64, rho: f64, u: &[f64; 3], temp: f64, node: &[f64; 3]) -> f64 {
    let two_rt = 2.0 * r * temp;
    let pref = rho / (std::f64::consts::PI * two_rt).powf(dim as f64 / 2.0);
    let mut q = 0.0;
    for ax in 0..dim {
        let c = node[ax] - u[ax];
        q += c * c;
    }
    pref * (-q / two_rt).exp()
}

/// Samples the local Maxwellian of one cell on a velocity grid.
pub fn maxwellian_cell(
    fields: &MacroFields,
    cell: usize,
    vgrid: &VelocityGrid,
) -> Result<Vec<f64>> {
    let rho = fields.rho[cell];
    let temp = fields.temp[cell];
    if rho <= DEGENERATE_FLOOR || !rho.is_finite() {
        return Err(Error::NonPhysical { cell, what: format!("density {rho}") });
    }
    if temp <= DEGENERATE_FLOOR || !temp.is_finite() {
        return Err(Error::NonPhysical { cell, what: format!("temperature {temp}") });
    }
    Ok(vgrid
        .nodes
        .iter()
        .map(|node| maxwellian_at(fields.dim, fields.gas_constant, rho, &fields.u[cell], temp, node))
        .collect())
}

/// Samples the local Maxwellian of every cell into a distribution field.
pub fn maxwellian(
    fields: &MacroFields,
    sgrid: &Arc<SpatialGrid>,
    vgrid: &Arc<VelocityGrid>,
) -> Result<DistField> {
    fields.validate()?;
    if fields.dim != vgrid.dim {
        return Err(Error::InvalidInput(format!(
            "field dimension {} does not match grid dimension {}",
            fields.dim, vgrid.dim
        )));
    }
    if fields.n_cells() != sgrid.n_cells {
        return Err(Error::InvalidInput(format!(
            "fields have {} cells, spatial grid has {}",
            fields.n_cells(),
            sgrid.n_cells
        )));
    }
    let mut values = Vec::with_capacity(sgrid.n_cells * vgrid.n_nodes());
    for cell in 0..sgrid.n_cells {
        values.extend(maxwellian_cell(fields, cell, vgrid)?);
    }
    Ok(DistField { sgrid: sgrid.clone(), vgrid: vgrid.clone(), values })
}

/// Raw velocity moments of one cell's node values: mass, momentum, energy.
pub fn node_moments(values: &[f64], vgrid: &VelocityGrid) -> (f64, [f64; 3], f64) {
    let mut mass = 0.0;
    let mut mom = [0.0; 3];
    let mut energy = 0.0;
    for (k, &f) in values.iter().enumerate() {
        let w = vgrid.weights[k];
        let node = &vgrid.nodes[k];
        let wf = w * f;
        mass += wf;
        let mut v2 = 0.0;
        for ax in 0..vgrid.dim {
            mom[ax] += wf * node[ax];
            v2 += node[ax] * node[ax];
        }
        energy += 0.5 * wf * v2;
    }
    (mass, mom, energy)
}

/// Extracts (rho, u, T) per cell.
///
/// Temperature comes from E = rho |u|^2 / 2 + (d/2) rho R T; a non-positive
/// result is a hard error, never clamped.
pub fn moments(f: &DistField, gas_constant: f64) -> Result<MacroFields> {
    if gas_constant <= 0.0 {
        return Err(Error::InvalidInput(format!(
            "gas constant must be positive, got {gas_constant}"
        )));
    }
    let dim = f.vgrid.dim;
    let n_cells = f.n_cells();
    let mut rho = Vec::with_capacity(n_cells);
    let mut u = Vec::with_capacity(n_cells);
    let mut temp = Vec::with_capacity(n_cells);
    for cell in 0..n_cells {
        let (mass, mom, energy) = node_moments(f.cell(cell), &f.vgrid);
        if !(mass > DEGENERATE_FLOOR && mass.is_finite()) {
            return Err(Error::DegenerateMoments { cell, what: format!("mass {mass}") });
        }
        let mut uu = [0.0; 3];
        let mut ke = 0.0;
        for ax in 0..dim {
            uu[ax] = mom[ax] / mass;
            ke += uu[ax] * uu[ax];
        }
        let internal = energy - 0.5 * mass * ke;
        let t = 2.0 * internal / (dim as f64 * mass * gas_constant);
        if !(t > DEGENERATE_FLOOR && t.is_finite()) {
            return Err(Error::DegenerateMoments {
                cell,
                what: format!("temperature {t} from internal energy {internal}"),
            });
        }
        rho.push(mass);
        u.push(uu);
        temp.push(t);
    }
    Ok(MacroFields { dim, gas_constant, rho, u, temp })
}

/// Pressure decomposition per cell: scalar pressure and trace-free deviatoric
/// stress, from centered second moments.
#[derive(Debug, Clone)]
pub struct PressureTensor {
    pub dim: usize,
    /// p = tr(P) / d.
    pub pressure: Vec<f64>,
    /// tau = P - p I, symmetric and trace-free per cell.
    pub deviatoric: Vec<[[f64; 3]; 3]>,
}

/// Centered second-moment tensor of one cell's node values.
pub fn centered_second_moment(values: &[f64], u: &[f64; 3], vgrid: &VelocityGrid) -> [[f64; 3]; 3] {
    let mut p = [[0.0; 3]; 3];
    for (k, &f) in values.iter().enumerate() {
        let w = vgrid.weights[k] * f;
        let node = &vgrid.nodes[k];
        let mut c = [0.0; 3];
        for ax in 0..vgrid.dim {
            c[ax] = node[ax] - u[ax];
        }
        for i in 0..vgrid.dim {
            for j in 0..=i {
                p[i][j] += w * c[i] * c[j];
            }
        }
    }
    for i in 0..vgrid.dim {
        for j in (i + 1)..vgrid.dim {
            p[i][j] = p[j][i];
        }
    }
    p
}

/// Full pressure tensor split p I + tau computed against the given fields'
/// bulk velocity.
pub fn pressure_tensor(f: &DistField, fields: &MacroFields) -> Result<PressureTensor> {
    let dim = f.vgrid.dim;
    if fields.n_cells() != f.n_cells() || fields.dim != dim {
        return Err(Error::InvalidInput(
            "fields and distribution disagree in shape for pressure_tensor".into(),
        ));
    }
    let mut pressure = Vec::with_capacity(f.n_cells());
    let mut deviatoric = Vec::with_capacity(f.n_cells());
    for cell in 0..f.n_cells() {
        let mut p = centered_second_moment(f.cell(cell), &fields.u[cell], &f.vgrid);
        let trace: f64 = (0..dim).map(|i| p[i][i]).sum();
        let iso = trace / dim as f64;
        for (i, row) in p.iter_mut().enumerate().take(dim) {
            row[i] -= iso;
        }
        pressure.push(iso);
        deviatoric.push(p);
    }
    Ok(PressureTensor { dim, pressure, deviatoric })
}

/// Which quadrature to use for per-cell velocity integrals.
#[derive(Debug, Clone)]
pub enum QuadSpec<'a> {
    /// Fresh Gauss-Hermite grid per cell, centered at the local (u, T).
    /// Exact for the moment identities checked here.
    PerCellGaussHermite { per_axis: usize },
    /// One shared grid for all cells.
    Shared(&'a Arc<VelocityGrid>),
}

impl QuadSpec<'_> {
    /// Grid to use for the given cell.
    pub fn grid_for(&self, fields: &MacroFields, cell: usize) -> Result<Arc<VelocityGrid>> {
        match self {
            QuadSpec::PerCellGaussHermite { per_axis } => Ok(Arc::new(VelocityGrid::gauss_hermite(
                fields.dim,
                *per_axis,
                fields.gas_constant,
                fields.temp[cell],
                fields.u[cell],
            )?)),
            QuadSpec::Shared(g) => Ok((*g).clone()),
        }
    }
}

/// Result of checking the Gaussian second and fourth moment identities.
#[derive(Debug, Clone)]
pub struct GaussianMomentReport {
    /// Worst relative error in int C_i C_j M = rho R T delta_ij.
    pub max_err_second: f64,
    /// Worst relative error in the isotropic fourth-moment formula.
    pub max_err_fourth: f64,
    pub worst_cell: usize,
}

fn kron(i: usize, j: usize) -> f64 {
    if i == j {
        1.0
    } else {
        0.0
    }
}

/// Verifies, cell by cell, that quadrature moments of the local Maxwellian
/// match the closed forms
/// int C_i C_j M = rho R T delta_ij and
/// int C_i C_j C_k C_l M = rho (R T)^2 (d_ij d_kl + d_ik d_jl + d_il d_jk),
/// evaluated in the co-moving frame.
pub fn gaussian_moment_check(fields: &MacroFields, quad: QuadSpec) -> Result<GaussianMomentReport> {
    fields.validate()?;
    let d = fields.dim;
    let mut report = GaussianMomentReport { max_err_second: 0.0, max_err_fourth: 0.0, worst_cell: 0 };
    for cell in 0..fields.n_cells() {
        let vgrid = quad.grid_for(fields, cell)?;
        let m = maxwellian_cell(fields, cell, &vgrid)?;
        let rho = fields.rho[cell];
        let rt = fields.gas_constant * fields.temp[cell];
        let u = &fields.u[cell];
        let scale2 = rho * rt;
        let scale4 = rho * rt * rt;
        let mut cell_err = 0.0f64;
        for i in 0..d {
            for j in 0..d {
                let mut m2 = 0.0;
                for (k, &mk) in m.iter().enumerate() {
                    let node = &vgrid.nodes[k];
                    m2 += vgrid.weights[k] * mk * (node[i] - u[i]) * (node[j] - u[j]);
                }
                let err = (m2 - scale2 * kron(i, j)).abs() / scale2;
                if err > report.max_err_second {
                    report.max_err_second = err;
                }
                cell_err = cell_err.max(err);
            }
        }
        for i in 0..d {
            for j in 0..d {
                for k in 0..d {
                    for l in 0..d {
                        let mut m4 = 0.0;
                        for (idx, &mk) in m.iter().enumerate() {
                            let node = &vgrid.nodes[idx];
                            m4 += vgrid.weights[idx]
                                * mk
                                * (node[i] - u[i])
                                * (node[j] - u[j])
                                * (node[k] - u[k])
                                * (node[l] - u[l]);
                        }
                        let exact = scale4
                            * (kron(i, j) * kron(k, l)
                                + kron(i, k) * kron(j, l)
                                + kron(i, l) * kron(j, k));
                        let err = (m4 - exact).abs() / scale4;
                        if err > report.max_err_fourth {
                            report.max_err_fourth = err;
                        }
                        cell_err = cell_err.max(err);
                    }
                }
            }
        }
        if cell_err >= report.max_err_second.max(report.max_err_fourth) {
            report.worst_cell = cell;
        }
    }
    Ok(report)
}
