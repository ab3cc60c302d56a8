//! Assembly of the shifted pair operator for one angular mode.
//!
//! Unknown layout (N = grid nodes, all in (0, R]):
//!   TE: `x = [u(0..N), v(N..2N)]` — each field is the scalar coefficient of
//!       the tangential vector harmonic Φ.
//!   TM: `x = [a_u, b_u, a_v, b_v]`, four blocks of length N — each field is
//!       `a·Y r̂ + b·Ψ` with Y the scalar harmonic and Ψ = r∇Y.
//!
//! Row allocation (TE, 2N rows):
//!   * regularity of u at the origin (interpolant of u vanishes at r = 0),
//!   * the u-equation `curlcurl u − z(1+m)u − m v = (1+m)f` collocated at
//!     interior nodes 1..=N−2,
//!   * tangential trace u(R) = 0 and tangential curl trace (r u)'(R) = 0,
//!   * regularity of v, and the v-equation `curlcurl v − z v = g` at
//!     nodes 1..=N−2.
//!
//! Row allocation (TM, 4N rows):
//!   * two regularity rows for the u-pair: the interpolants of `a_u − b_u`
//!     and of the curl coefficient `c_u = b_u' + (b_u − a_u)/r` vanish at 0,
//!   * the Y-component of the u-equation at nodes 1..=N−1 (boundary node
//!     included — the Ψ-component is linearly dependent on it and the
//!     divergence rows, so it is never collocated),
//!   * the divergence consequence `−z·div((1+m)u) − div(m v) = div((1+m)f)`
//!     at nodes 1..=N−2,
//!   * traces b_u(R) = 0 and c_u(R) = 0,
//!   * mirrored rows for the v-pair: two regularity rows, the Y-equation at
//!     1..=N−1 and `−z·div v = div g` at 1..=N−2 (v carries no traces).
//!
//! Two conventions are load-bearing for the exact operator identities:
//!
//!   1. Weighted divergences are discretized in "multiply nodally, then
//!      differentiate" form: `div_h(w·u) := (D + 2/r)(w∘a) − l(l+1)/r·(w∘b)`.
//!      The same matrix appears in the constraint rows, the projection
//!      problem, the source embedding, and the z-coefficient of the
//!      assembled system, so discrete solutions satisfy the divergence
//!      bookkeeping identically rather than to discretization error.
//!   2. The assembled matrix is affine in the shift: `A(z) = A₀ − z·E`
//!      where `E` is also the source-embedding matrix.  Re-shifting reuses
//!      A₀ and E, which makes the resolvent-shift identity
//!      `S_z(I − λS_z)⁻¹ = P^d R_{z+λ}` an exact matrix statement.

use std::sync::OnceLock;

use ndarray::{Array1, Array2};

use crate::{Error, Result};
use crate::grid::RadialGrid;
use crate::linalg::{LuFactors, Mat, Vecc};
use crate::medium::MediumProfile;
use crate::modes::{ModeIndex, Polarization};
use crate::{C64, ONE, ZERO};

/// Row-index bookkeeping for the TE sector.
#[derive(Clone, Debug)]
struct TeRows {
    reg_u: usize,
    /// Rows collocating the u-equation; row `ueq.0 + j` sits at node `1 + j`.
    ueq: (usize, usize),
    trace_value: usize,
    trace_curl: usize,
    reg_v: usize,
    veq: (usize, usize),
}

/// Row-index bookkeeping for the TM sector.
#[derive(Clone, Debug)]
struct TmRows {
    reg_u_origin: usize,
    reg_u_curl: usize,
    /// Y-equation rows for u; row `yu.0 + j` sits at node `1 + j`.
    yu: (usize, usize),
    divu: (usize, usize),
    trace_tangential: usize,
    trace_curl: usize,
    reg_v_origin: usize,
    reg_v_curl: usize,
    yv: (usize, usize),
    divv: (usize, usize),
}

/// Discretization of the pair operator `B_z` for one mode: the assembled
/// square system, its shift-affine decomposition, the nodal differential
/// action used by the operator-identity checks, and the constraint rows
/// spanning the divergence-free trace-free subspace.
pub struct ModeOperatorBlocks {
    mode: ModeIndex,
    shift: C64,
    grid: RadialGrid,
    medium: MediumProfile,
    stationary: Mat,
    source_map: Mat,
    action: Mat,
    curl_curl: Mat,
    h_rows: Mat,
    matrix: OnceLock<Mat>,
    factors: OnceLock<LuFactors>,
    condition: OnceLock<f64>,
}

/// Complexified grid operators shared by the assembly routines.
pub(crate) struct SectorOps {
    pub n: usize,
    pub l2: f64,
    pub radius: f64,
    pub d1: Mat,
    pub rinv: Array1<C64>,
    pub at_zero: Array1<C64>,
    /// Curl coefficient map `(a, b) ↦ c = b' + (b − a)/r`, N×2N.
    pub curl: Mat,
    /// Curl-curl action on an `(a, b)` pair: rows `[Y; Ψ]`, 2N×2N.
    pub curl_curl_pair: Mat,
    /// Scalar curl-curl action on a Φ coefficient (the TE operator), N×N.
    pub te_op: Mat,
}

pub(crate) fn complexify(a: &Array2<f64>) -> Mat {
    a.mapv(|x| C64::new(x, 0.0))
}

fn scale_rows(mat: &Mat, w: &Array1<C64>) -> Mat {
    let mut out = mat.clone();
    for (i, mut row) in out.rows_mut().into_iter().enumerate() {
        let wi = w[i];
        row.mapv_inplace(|x| x * wi);
    }
    out
}

impl SectorOps {
    pub(crate) fn new(mode: ModeIndex, grid: &RadialGrid) -> Self {
        let n = grid.len();
        let l2 = mode.ll1();
        let d1 = complexify(grid.d1());
        let d2 = complexify(grid.d2());
        let rinv: Array1<C64> = grid.nodes().mapv(|r| C64::new(1.0 / r, 0.0));
        let at_zero: Array1<C64> = grid.at_zero().mapv(|x| C64::new(x, 0.0));

        // c = b' + (b − a)/r  →  columns [a | b] of width N each.
        let mut curl = Mat::zeros((n, 2 * n));
        for i in 0..n {
            curl[[i, i]] = -rinv[i];
            for j in 0..n {
                curl[[i, n + j]] = d1[[i, j]];
            }
            curl[[i, n + i]] += rinv[i];
        }

        // curlcurl(a·Y r̂ + b·Ψ) = −l(l+1)/r·c · Y r̂ − (c' + c/r) · Ψ.
        let y_rows = scale_rows(&curl, &rinv).mapv(|x| x * (-l2));
        let mut psi_rows = d1.dot(&curl);
        for i in 0..n {
            for j in 0..2 * n {
                psi_rows[[i, j]] += rinv[i] * curl[[i, j]];
            }
        }
        psi_rows.mapv_inplace(|x| -x);
        let mut curl_curl_pair = Mat::zeros((2 * n, 2 * n));
        for i in 0..n {
            for j in 0..2 * n {
                curl_curl_pair[[i, j]] = y_rows[[i, j]];
                curl_curl_pair[[n + i, j]] = psi_rows[[i, j]];
            }
        }

        // curlcurl(u·Φ) = (−u'' − 2u'/r + l(l+1)u/r²) · Φ.
        let mut te_op = d2.mapv(|x| -x);
        for i in 0..n {
            for j in 0..n {
                te_op[[i, j]] -= C64::new(2.0, 0.0) * rinv[i] * d1[[i, j]];
            }
            te_op[[i, i]] += C64::new(l2, 0.0) * rinv[i] * rinv[i];
        }

        SectorOps {
            n,
            l2,
            radius: grid.radius(),
            d1,
            rinv,
            at_zero,
            curl,
            curl_curl_pair,
            te_op,
        }
    }

    /// Weighted nodal divergence `div_h(w·(a,b)) = (D + 2/r)(w∘a) − l(l+1)/r·(w∘b)`
    /// as an N×2N matrix acting on the stacked pair.
    pub(crate) fn weighted_divergence(&self, w: &Array1<C64>) -> Mat {
        let n = self.n;
        let mut out = Mat::zeros((n, 2 * n));
        for i in 0..n {
            for j in 0..n {
                out[[i, j]] = self.d1[[i, j]] * w[j];
            }
            out[[i, i]] += C64::new(2.0, 0.0) * self.rinv[i] * w[i];
            out[[i, n + i]] = -C64::new(self.l2, 0.0) * self.rinv[i] * w[i];
        }
        out
    }

    /// Discrete gradient `φ ↦ (φ', φ/r)` as a 2N×N matrix.
    pub(crate) fn gradient(&self) -> Mat {
        let n = self.n;
        let mut out = Mat::zeros((2 * n, n));
        for i in 0..n {
            for j in 0..n {
                out[[i, j]] = self.d1[[i, j]];
            }
            out[[n + i, i]] = self.rinv[i];
        }
        out
    }
}

pub(crate) fn medium_samples(
    medium: &MediumProfile,
    grid: &RadialGrid,
) -> (Array1<C64>, Array1<C64>) {
    let m: Array1<C64> = grid.nodes().mapv(|r| medium.m(r));
    let one_plus_m = m.mapv(|mi| ONE + mi);
    (m, one_plus_m)
}

/// Assembles the discretized pair operator `B_z` for one mode.
///
/// The grid and the medium must describe the same ball.
pub fn assemble_bz(
    mode: ModeIndex,
    medium: &MediumProfile,
    z: C64,
    grid: &RadialGrid,
) -> Result<ModeOperatorBlocks> {
    if !z.is_finite() {
        return Err(Error::validation("assemble_bz: shift must be finite"));
    }
    let radius = grid.radius();
    if (radius - medium.radius()).abs() > 1e-12 * radius.max(1.0) {
        return Err(Error::validation(format!(
            "assemble_bz: grid radius {} does not match medium radius {}",
            radius,
            medium.radius()
        )));
    }
    let ops = SectorOps::new(mode, grid);
    let (m, one_plus_m) = medium_samples(medium, grid);
    let built = match mode.polarization() {
        Polarization::TE => assemble_te(&ops, &m, &one_plus_m, z),
        Polarization::TM => assemble_tm(&ops, &m, &one_plus_m, z),
    };
    Ok(ModeOperatorBlocks {
        mode,
        shift: z,
        grid: grid.clone(),
        medium: medium.clone(),
        stationary: built.stationary,
        source_map: built.source_map,
        action: built.action,
        curl_curl: built.curl_curl,
        h_rows: built.h_rows,
        matrix: OnceLock::new(),
        factors: OnceLock::new(),
        condition: OnceLock::new(),
    })
}

struct AssembledParts {
    stationary: Mat,
    source_map: Mat,
    action: Mat,
    curl_curl: Mat,
    h_rows: Mat,
}

fn assemble_te(ops: &SectorOps, m: &Array1<C64>, one_plus_m: &Array1<C64>, z: C64) -> AssembledParts {
    let n = ops.n;
    let dim = 2 * n;
    let mut a0 = Mat::zeros((dim, dim));
    let mut e = Mat::zeros((dim, dim));

    let rows = TeRows {
        reg_u: 0,
        ueq: (1, n - 1),
        trace_value: n - 1,
        trace_curl: n,
        reg_v: n + 1,
        veq: (n + 2, 2 * n),
    };

    // Regularity of u: the interpolant of u vanishes at r = 0.
    for j in 0..n {
        a0[[rows.reg_u, j]] = ops.at_zero[j];
    }
    // u-equation at interior nodes: curlcurl u − z(1+m)u − m v = (1+m)f.
    for (offset, i) in (1..=n - 2).enumerate() {
        let row = rows.ueq.0 + offset;
        for j in 0..n {
            a0[[row, j]] = ops.te_op[[i, j]];
        }
        a0[[row, n + i]] = -m[i];
        e[[row, i]] = one_plus_m[i];
    }
    // Tangential trace u(R) = 0 and tangential curl trace (r u)'(R) = 0.
    a0[[rows.trace_value, n - 1]] = ONE;
    a0[[rows.trace_curl, n - 1]] = ONE;
    for j in 0..n {
        a0[[rows.trace_curl, j]] += C64::new(ops.radius, 0.0) * ops.d1[[n - 1, j]];
    }
    // Regularity of v and the v-equation: curlcurl v − z v = g.
    for j in 0..n {
        a0[[rows.reg_v, n + j]] = ops.at_zero[j];
    }
    for (offset, i) in (1..=n - 2).enumerate() {
        let row = rows.veq.0 + offset;
        for j in 0..n {
            a0[[row, n + j]] = ops.te_op[[i, j]];
        }
        e[[row, n + i]] = ONE;
    }

    // The shift multiplies (1+m)u in the u-equation and v in the v-equation —
    // exactly the source embedding, so A(z) = A₀ − z·E.

    // Nodal differential action (f, g) of the pair operator at shift z.
    let mut action = Mat::zeros((dim, dim));
    for i in 0..n {
        let wi = ONE / one_plus_m[i];
        for j in 0..n {
            action[[i, j]] = ops.te_op[[i, j]] * wi;
            action[[n + i, n + j]] = ops.te_op[[i, j]];
        }
        action[[i, i]] -= z;
        action[[i, n + i]] = -m[i] * wi;
        action[[n + i, n + i]] -= z;
    }

    // Constraint rows of the discrete H(D): traces and regularity only
    // (TE fields are automatically divergence-free).
    let mut h_rows = Mat::zeros((4, dim));
    for j in 0..dim {
        h_rows[[0, j]] = a0[[rows.reg_u, j]];
        h_rows[[1, j]] = a0[[rows.trace_value, j]];
        h_rows[[2, j]] = a0[[rows.trace_curl, j]];
        h_rows[[3, j]] = a0[[rows.reg_v, j]];
    }

    AssembledParts {
        stationary: a0,
        source_map: e,
        action,
        curl_curl: ops.te_op.clone(),
        h_rows,
    }
}

fn assemble_tm(ops: &SectorOps, m: &Array1<C64>, one_plus_m: &Array1<C64>, z: C64) -> AssembledParts {
    let n = ops.n;
    let dim = 4 * n;
    let mut a0 = Mat::zeros((dim, dim));
    let mut e = Mat::zeros((dim, dim));

    let rows = TmRows {
        reg_u_origin: 0,
        reg_u_curl: 1,
        yu: (2, n + 1),
        divu: (n + 1, 2 * n - 1),
        trace_tangential: 2 * n - 1,
        trace_curl: 2 * n,
        reg_v_origin: 2 * n + 1,
        reg_v_curl: 2 * n + 2,
        yv: (2 * n + 3, 3 * n + 2),
        divv: (3 * n + 2, 4 * n),
    };

    let wdiv_w = ops.weighted_divergence(one_plus_m);
    let wdiv_m = ops.weighted_divergence(m);
    let wdiv_1 = ops.weighted_divergence(&Array1::from_elem(n, ONE));

    // u-pair regularity: interpolants of a_u − b_u and of c_u vanish at 0.
    for j in 0..n {
        a0[[rows.reg_u_origin, j]] = ops.at_zero[j];
        a0[[rows.reg_u_origin, n + j]] = -ops.at_zero[j];
    }
    for j in 0..2 * n {
        let mut acc = ZERO;
        for i in 0..n {
            acc += ops.at_zero[i] * ops.curl[[i, j]];
        }
        a0[[rows.reg_u_curl, j]] = acc;
        a0[[rows.reg_v_curl, 2 * n + j]] = acc;
    }
    // v-pair origin regularity.
    for j in 0..n {
        a0[[rows.reg_v_origin, 2 * n + j]] = ops.at_zero[j];
        a0[[rows.reg_v_origin, 3 * n + j]] = -ops.at_zero[j];
    }

    // Y-component of the u-equation at nodes 1..=N−1:
    //   [curlcurl u]_Y − z(1+m)a_u − m a_v = (1+m)a_f.
    for (offset, i) in (1..=n - 1).enumerate() {
        let row = rows.yu.0 + offset;
        for j in 0..2 * n {
            a0[[row, j]] = ops.curl_curl_pair[[i, j]];
        }
        a0[[row, 2 * n + i]] = -m[i];
        e[[row, i]] = one_plus_m[i];
    }
    // Divergence rows for u at nodes 1..=N−2:
    //   −z·div_h((1+m)u) − div_h(m v) = div_h((1+m)f).
    for (offset, i) in (1..=n - 2).enumerate() {
        let row = rows.divu.0 + offset;
        for j in 0..2 * n {
            a0[[row, 2 * n + j]] = -wdiv_m[[i, j]];
            e[[row, j]] = wdiv_w[[i, j]];
        }
    }
    // Traces: b_u(R) = 0 and c_u(R) = 0.
    a0[[rows.trace_tangential, n + (n - 1)]] = ONE;
    for j in 0..2 * n {
        a0[[rows.trace_curl, j]] = ops.curl[[n - 1, j]];
    }

    // Y-component of the v-equation at nodes 1..=N−1: [curlcurl v]_Y − z a_v = a_g.
    for (offset, i) in (1..=n - 1).enumerate() {
        let row = rows.yv.0 + offset;
        for j in 0..2 * n {
            a0[[row, 2 * n + j]] = ops.curl_curl_pair[[i, j]];
        }
        e[[row, 2 * n + i]] = ONE;
    }
    // Divergence rows for v at nodes 1..=N−2: −z·div_h v = div_h g.
    for (offset, i) in (1..=n - 2).enumerate() {
        let row = rows.divv.0 + offset;
        for j in 0..2 * n {
            e[[row, 2 * n + j]] = wdiv_1[[i, j]];
        }
    }

    // Nodal differential action: (a_f, b_f) = [curlcurl u − z(1+m)u − m v]/(1+m),
    // (a_g, b_g) = curlcurl v − z v, evaluated at every node.
    let mut action = Mat::zeros((dim, dim));
    for i in 0..n {
        let wi = ONE / one_plus_m[i];
        for j in 0..2 * n {
            action[[i, j]] = ops.curl_curl_pair[[i, j]] * wi;
            action[[n + i, j]] = ops.curl_curl_pair[[n + i, j]] * wi;
            action[[2 * n + i, 2 * n + j]] = ops.curl_curl_pair[[i, j]];
            action[[3 * n + i, 2 * n + j]] = ops.curl_curl_pair[[n + i, j]];
        }
        action[[i, i]] -= z;
        action[[n + i, n + i]] -= z;
        action[[i, 2 * n + i]] = -m[i] * wi;
        action[[n + i, 3 * n + i]] = -m[i] * wi;
        action[[2 * n + i, 2 * n + i]] -= z;
        action[[3 * n + i, 3 * n + i]] -= z;
    }

    // Constraint rows of the discrete H(D): traces, regularity, and the two
    // divergence constraints div_h((1+m)u) = 0, div_h v = 0.
    let h_count = 6 + 2 * (n - 2);
    let mut h_rows = Mat::zeros((h_count, dim));
    for j in 0..dim {
        h_rows[[0, j]] = a0[[rows.reg_u_origin, j]];
        h_rows[[1, j]] = a0[[rows.reg_u_curl, j]];
        h_rows[[2, j]] = a0[[rows.trace_tangential, j]];
        h_rows[[3, j]] = a0[[rows.trace_curl, j]];
        h_rows[[4, j]] = a0[[rows.reg_v_origin, j]];
        h_rows[[5, j]] = a0[[rows.reg_v_curl, j]];
    }
    for (offset, i) in (1..=n - 2).enumerate() {
        for j in 0..2 * n {
            h_rows[[6 + offset, j]] = wdiv_w[[i, j]];
            h_rows[[6 + (n - 2) + offset, 2 * n + j]] = wdiv_1[[i, j]];
        }
    }

    AssembledParts {
        stationary: a0,
        source_map: e,
        action,
        curl_curl: ops.curl_curl_pair.clone(),
        h_rows,
    }
}

impl ModeOperatorBlocks {
    pub fn mode(&self) -> ModeIndex {
        self.mode
    }

    pub fn shift(&self) -> C64 {
        self.shift
    }

    pub fn grid(&self) -> &RadialGrid {
        &self.grid
    }

    pub fn medium(&self) -> &MediumProfile {
        &self.medium
    }

    /// Total unknown count: `2N` for TE, `4N` for TM.
    pub fn dim(&self) -> usize {
        self.stationary.nrows()
    }

    /// Length of one field (u or v): `N` for TE, `2N` for TM.
    pub fn field_len(&self) -> usize {
        self.dim() / 2
    }

    /// Shift-independent part `A₀` of the assembled system.
    pub fn stationary_part(&self) -> &Mat {
        &self.stationary
    }

    /// Source embedding `E`: maps stacked nodal sources `(f, g)` to the
    /// right-hand side, and doubles as the z-coefficient in `A(z) = A₀ − z·E`.
    pub fn source_map(&self) -> &Mat {
        &self.source_map
    }

    /// Nodal differential action of the pair operator at the assembled
    /// shift: maps stacked fields `(u, v)` to stacked sources `(f, g)`
    /// evaluated at every node (no boundary or constraint rows).
    pub fn differential_action(&self) -> &Mat {
        &self.action
    }

    /// The discrete curl-curl block alone (scalar operator for TE, the
    /// `[Y; Ψ]` pair action for TM).
    pub fn curl_curl_block(&self) -> &Mat {
        &self.curl_curl
    }

    /// Constraint rows whose null space realizes the discrete H(D).
    ///
    /// Row order is part of the public contract.  TE (4 rows): origin
    /// regularity of u; tangential trace `u(R)`; tangential curl trace
    /// `(r u)'(R)`; origin regularity of v.  TM (6 + 2(N−2) rows): origin
    /// regularity of `a_u − b_u`; origin regularity of the curl coefficient
    /// `c_u`; tangential trace `b_u(R)`; curl trace `c_u(R)`; the two v-pair
    /// origin rows; then the weighted divergence of u at nodes `1..=N−2`
    /// followed by the divergence of v at the same nodes.
    pub fn constraint_rows(&self) -> &Mat {
        &self.h_rows
    }

    /// Orthonormal basis of the discrete constrained space H(D).
    pub fn constrained_basis(&self) -> Result<Mat> {
        crate::linalg::null_space(&self.h_rows)
    }

    /// Assembled matrix `A(z) = A₀ − z·E` at the blocks' own shift.
    pub fn matrix(&self) -> &Mat {
        self.matrix.get_or_init(|| self.matrix_at(self.shift))
    }

    /// Assembled matrix at an arbitrary shift, reusing `A₀` and `E`.
    pub fn matrix_at(&self, w: C64) -> Mat {
        let mut a = self.stationary.clone();
        a.scaled_add(-w, &self.source_map);
        a
    }

    pub(crate) fn factors(&self) -> Result<&LuFactors> {
        if self.factors.get().is_none() {
            let f = LuFactors::new(self.matrix())?;
            let _ = self.factors.set(f);
        }
        Ok(self.factors.get().expect("factors just initialized"))
    }

    /// One-norm condition estimate of the assembled system.
    pub fn condition_estimate(&self) -> Result<f64> {
        if self.condition.get().is_none() {
            let lu = self.factors()?;
            let a = self.matrix();
            let norm1 = (0..a.ncols())
                .map(|j| a.column(j).iter().map(|x| x.norm()).sum::<f64>())
                .fold(0.0_f64, f64::max);
            let cond = norm1 * lu.inv_norm1_estimate();
            let _ = self.condition.set(cond);
        }
        Ok(*self.condition.get().expect("condition just initialized"))
    }

    /// Stacks separate `f`, `g` fields into the source vector layout.
    pub fn stack_pair(&self, f: &Vecc, g: &Vecc) -> Result<Vecc> {
        let half = self.field_len();
        if f.len() != half || g.len() != half {
            return Err(Error::validation(format!(
                "field length mismatch: expected {} per field, got {} and {}",
                half,
                f.len(),
                g.len()
            )));
        }
        let mut x = Vecc::zeros(2 * half);
        for i in 0..half {
            x[i] = f[i];
            x[half + i] = g[i];
        }
        Ok(x)
    }

    /// Splits a stacked vector into its `(u, v)` fields.
    pub fn split_pair(&self, x: &Vecc) -> (Vecc, Vecc) {
        let half = self.field_len();
        (
            x.slice(ndarray::s![0..half]).to_owned(),
            x.slice(ndarray::s![half..2 * half]).to_owned(),
        )
    }

    /// L² norm of one field in the mode's vector harmonic metric:
    /// `∫ (|a|² + l(l+1)|b|²) r² dr` for TM pairs, `l(l+1)·∫ |u|² r² dr` for TE.
    pub fn field_norm(&self, field: &Vecc) -> f64 {
        let w = self.grid.quad_r2();
        let l2 = self.mode.ll1();
        let n = self.grid.len();
        let mut acc = 0.0;
        match self.mode.polarization() {
            Polarization::TE => {
                for i in 0..n {
                    acc += l2 * w[i] * field[i].norm_sqr();
                }
            }
            Polarization::TM => {
                for i in 0..n {
                    acc += w[i] * (field[i].norm_sqr() + l2 * field[n + i].norm_sqr());
                }
            }
        }
        acc.sqrt()
    }
}
