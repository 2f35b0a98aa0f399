//! Separation of the deformation space into trivial and dynamically
//! meaningful directions. Provides the coordinate change on the irregular
//! times for the four structural cases (order at infinity ≥ 3, = 2, and the
//! two order-1 sub-cases), its inverse, the deformation vectors dual to the
//! reduced times, shifted Darboux coordinates, named trivial deformation
//! vectors, and the simplified Hamiltonian combinations available once the
//! trivial times are pinned to their canonical values.

use crate::deform::solve_nu;
use crate::lax::solve_isospectral_h;
use crate::linalg::lower_toeplitz_solve;
use crate::model::{
    compute_p1, ConnectionConfig, DarbouxState, DeformationVector, Pole, PoleStructure,
};
use crate::rational::binom;
use crate::scalar::{c, C};
use crate::{Error, Result};

/// Structural case of a time chart, decided by the pole order at infinity
/// (and the number of finite poles when that order is 1).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ChartCase {
    /// Order at infinity ≥ 3: both leading coefficients at infinity are
    /// normalizable, every finite pole position stays free.
    InfAtLeast3,
    /// Order at infinity = 2: the leading coefficient at infinity and the
    /// first pole position are normalizable.
    InfEq2,
    /// Order at infinity = 1 with at least two finite poles: the first two
    /// pole positions are normalizable.
    InfEq1Multi,
    /// Order at infinity = 1 with a single finite pole: its position and
    /// leading coefficient are normalizable.
    InfEq1Single,
}

/// Identifier of a reduced (dynamically meaningful) time.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IsoTime {
    /// τ_{∞,j}, j = 1..r_∞−3 (only when the order at infinity is ≥ 3).
    Inf { j: usize },
    /// τ_{X_s,k}; k = 1..r_s−1, except the single-pole case where the top
    /// difference is pinned and k stops at r_1−2. `s` is 0-based.
    X { s: usize, k: usize },
    /// Scaled pole position X̃_s (0-based `s`; only the non-pinned positions).
    Pos { s: usize },
}

/// The full coordinate change on the time side: trivial times (sheet sums,
/// the affine normalization pair T₁, T₂ and the monodromy sums) together
/// with the reduced times (τ's and scaled pole positions). Self-contained:
/// the original configuration can be reconstructed exactly.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeChart {
    pub case_tag: ChartCase,
    pub r_inf: usize,
    pub r_s: Vec<usize>,
    pub hbar: C,
    /// Affine shift of the spectral variable encoded in the chart.
    pub t1: C,
    /// Affine scale of the spectral variable; always nonzero.
    pub t2: C,
    /// Sheet sums at infinity, k = 0..r_∞−1 (k = 0 is the monodromy sum).
    pub sum_inf: Vec<C>,
    /// Sheet sums at pole s, k = 0..r_s−1.
    pub sum_x: Vec<Vec<C>>,
    /// Monodromy sheet difference at infinity (carried, never deformed).
    pub mono_diff_inf: C,
    /// Monodromy sheet differences at the finite poles.
    pub mono_diff_x: Vec<C>,
    /// τ_{∞,j}, j = 1..r_∞−3 (index j−1); empty unless r_∞ ≥ 4.
    pub tau_inf: Vec<C>,
    /// τ_{X_s,k}, k = 1..r_s−1 (index k−1); the single-pole case stores one
    /// fewer entry because the top difference is pinned by T₂.
    pub tau_x: Vec<Vec<C>>,
    /// X̃_s = T₂X_s + T₁ for every pole; the first 0, 1 or 2 entries are
    /// pinned by the case (they equal 0 and 1 once T₁, T₂ absorb them).
    pub x_tilde: Vec<C>,
}

fn factorial(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

impl TimeChart {
    /// Decide the case tag from the pole structure.
    pub fn case_of(r_inf: usize, n: usize) -> ChartCase {
        match (r_inf, n) {
            (r, _) if r >= 3 => ChartCase::InfAtLeast3,
            (2, _) => ChartCase::InfEq2,
            (1, 1) => ChartCase::InfEq1Single,
            _ => ChartCase::InfEq1Multi,
        }
    }

    pub fn n(&self) -> usize {
        self.r_s.len()
    }

    /// Index of the first pole whose scaled position is a reduced time.
    pub fn free_position_start(&self) -> usize {
        match self.case_tag {
            ChartCase::InfAtLeast3 => 0,
            ChartCase::InfEq2 => 1,
            ChartCase::InfEq1Multi => 2,
            ChartCase::InfEq1Single => self.n(), // none
        }
    }

    /// Number of τ entries at pole s (one fewer in the single-pole case).
    pub fn tau_x_count(&self, s: usize) -> usize {
        let full = self.r_s[s].saturating_sub(1);
        if self.case_tag == ChartCase::InfEq1Single { full.saturating_sub(1) } else { full }
    }

    /// Every reduced-time identifier, in a fixed order; the count equals the
    /// genus of the structure.
    pub fn iso_times(&self) -> Vec<IsoTime> {
        let mut out = Vec::new();
        for j in 1..=self.r_inf.saturating_sub(3) {
            out.push(IsoTime::Inf { j });
        }
        for s in 0..self.n() {
            for k in 1..=self.tau_x_count(s) {
                out.push(IsoTime::X { s, k });
            }
        }
        for s in self.free_position_start()..self.n() {
            out.push(IsoTime::Pos { s });
        }
        out
    }

    /// Pole structure encoded by the chart (positions recovered from the
    /// scaled ones).
    pub fn structure(&self) -> PoleStructure {
        PoleStructure {
            r_inf: self.r_inf,
            poles: self
                .r_s
                .iter()
                .zip(self.x_tilde.iter())
                .map(|(&r, &xt)| Pole { x: (xt - self.t1) / self.t2, r })
                .collect(),
        }
    }
}

/// Compute the time chart of a configuration. Fractional powers defining T₂
/// take the principal branch; every other chart entry is then a rational
/// expression in T₁, T₂ and the sheet data, so the inverse map is exact.
pub fn forward_time_map(cfg: &ConnectionConfig) -> Result<TimeChart> {
    let r_inf = cfg.r_inf();
    let n = cfg.n();
    let case_tag = TimeChart::case_of(r_inf, n);

    let (t1, t2) = match case_tag {
        ChartCase::InfAtLeast3 => {
            let lead = cfg.tdiff_inf(r_inf - 1);
            if lead.norm() < 1e-14 {
                return Err(Error::InvalidConfig(
                    "leading sheet coefficients at infinity coincide: the chart scale T2 vanishes"
                        .into(),
                ));
            }
            let t2 = (lead / c(2.0, 0.0)).powf(1.0 / (r_inf as f64 - 1.0));
            let t1 = cfg.tdiff_inf(r_inf - 2)
                / (c(2.0 * (r_inf as f64 - 2.0), 0.0) * t2.powi(r_inf as i32 - 2));
            (t1, t2)
        }
        ChartCase::InfEq2 => {
            let t2 = cfg.tdiff_inf(1) / c(2.0, 0.0);
            if t2.norm() < 1e-14 {
                return Err(Error::InvalidConfig(
                    "leading sheet coefficients at infinity coincide: the chart scale T2 vanishes"
                        .into(),
                ));
            }
            (-cfg.x_s(0) * t2, t2)
        }
        ChartCase::InfEq1Multi => {
            let d = cfg.x_s(1) - cfg.x_s(0);
            if d.norm() < 1e-14 {
                return Err(Error::InvalidConfig(
                    "first two pole positions coincide: the chart scale T2 vanishes".into(),
                ));
            }
            let t2 = c(1.0, 0.0) / d;
            (-cfg.x_s(0) * t2, t2)
        }
        ChartCase::InfEq1Single => {
            let r1 = cfg.r_s(0);
            let lead = cfg.tdiff_x(0, r1 - 1);
            if lead.norm() < 1e-14 {
                return Err(Error::InvalidConfig(
                    "leading sheet coefficients at the pole coincide: the chart scale T2 vanishes"
                        .into(),
                ));
            }
            let t2 = (lead / c(2.0, 0.0)).powf(-1.0 / (r1 as f64 - 1.0));
            (-cfg.x_s(0) * t2, t2)
        }
    };

    let sum_inf: Vec<C> = (0..r_inf).map(|k| cfg.tsum_inf(k)).collect();
    let sum_x: Vec<Vec<C>> =
        (0..n).map(|s| (0..cfg.r_s(s)).map(|k| cfg.tsum_x(s, k)).collect()).collect();

    // τ_{∞,j}: alternating binomial combination of the sheet differences,
    // rewritten so only integer powers of T₁ and T₂ appear.
    let mut tau_inf = Vec::new();
    if r_inf >= 4 {
        for j in 1..=(r_inf - 3) {
            let mut acc = c(0.0, 0.0);
            for i in 0..=(r_inf - j - 3) {
                let coeff = if i % 2 == 0 { 1.0 } else { -1.0 };
                acc += c(coeff * binom(j + i - 1, i), 0.0)
                    * (t1 / t2).powi(i as i32)
                    * cfg.tdiff_inf(j + i);
            }
            acc *= t2.powi(-(j as i32));
            let m = r_inf - 1 - j; // ≥ 2
            let sign = if (m - 1).is_multiple_of(2) { 1.0 } else { -1.0 };
            let coeff = sign * 2.0 * (r_inf as f64 - 2.0) * factorial(r_inf - 3)
                / (m as f64 * factorial(m - 2) * factorial(j - 1));
            acc += c(coeff, 0.0) * t1.powi(m as i32);
            tau_inf.push(acc);
        }
    }

    let mut tau_x = Vec::with_capacity(n);
    for s in 0..n {
        let kmax = if case_tag == ChartCase::InfEq1Single {
            cfg.r_s(s).saturating_sub(2)
        } else {
            cfg.r_s(s).saturating_sub(1)
        };
        tau_x.push((1..=kmax).map(|k| cfg.tdiff_x(s, k) * t2.powi(k as i32)).collect());
    }

    let x_tilde: Vec<C> = (0..n).map(|s| t2 * cfg.x_s(s) + t1).collect();

    Ok(TimeChart {
        case_tag,
        r_inf,
        r_s: (0..n).map(|s| cfg.r_s(s)).collect(),
        hbar: cfg.hbar,
        t1,
        t2,
        sum_inf,
        sum_x,
        mono_diff_inf: cfg.tdiff_inf(0),
        mono_diff_x: (0..n).map(|s| cfg.tdiff_x(s, 0)).collect(),
        tau_inf,
        tau_x,
        x_tilde,
    })
}

/// Reconstruct the configuration from a chart: the exact inverse of
/// [`forward_time_map`] (for charts whose T₂ is the principal root).
pub fn inverse_time_map(chart: &TimeChart) -> Result<ConnectionConfig> {
    if chart.t2.norm() < 1e-12 {
        return Err(Error::BranchInconsistency { detail: "chart scale T2 is zero".into() });
    }
    let r_inf = chart.r_inf;
    let n = chart.n();
    if chart.r_s.len() != chart.tau_x.len()
        || chart.sum_x.len() != n
        || chart.x_tilde.len() != n
        || chart.sum_inf.len() != r_inf
    {
        return Err(Error::BranchInconsistency {
            detail: "chart arrays do not match the declared pole orders".into(),
        });
    }
    let (t1, t2) = (chart.t1, chart.t2);

    // Sheet differences at infinity.
    let mut diff_inf = vec![c(0.0, 0.0); r_inf];
    diff_inf[0] = chart.mono_diff_inf;
    match chart.case_tag {
        ChartCase::InfAtLeast3 => {
            diff_inf[r_inf - 1] = c(2.0, 0.0) * t2.powi(r_inf as i32 - 1);
            diff_inf[r_inf - 2] =
                c(2.0 * (r_inf as f64 - 2.0), 0.0) * t1 * t2.powi(r_inf as i32 - 2);
            for k in 1..=r_inf.saturating_sub(3) {
                if chart.tau_inf.len() != r_inf - 3 {
                    return Err(Error::BranchInconsistency {
                        detail: "wrong number of reduced times at infinity".into(),
                    });
                }
                let mut bracket = c(
                    2.0 * factorial(r_inf - 2) / (factorial(k - 1) * factorial(r_inf - 1 - k)),
                    0.0,
                ) * t1.powi((r_inf - 1 - k) as i32);
                for j in 2..=(r_inf - 1 - k) {
                    bracket += c(
                        factorial(r_inf - 2 - j) / (factorial(k - 1) * factorial(r_inf - 1 - k - j)),
                        0.0,
                    ) * t1.powi((r_inf - 1 - j - k) as i32)
                        * chart.tau_inf[r_inf - 2 - j];
                }
                diff_inf[k] = t2.powi(k as i32) * bracket;
            }
        }
        ChartCase::InfEq2 => {
            diff_inf[1] = c(2.0, 0.0) * t2;
        }
        _ => {}
    }

    let t_inf: [Vec<C>; 2] = [
        (0..r_inf)
            .map(|k| (chart.sum_inf[k] + diff_inf[k]) / c(2.0, 0.0))
            .collect(),
        (0..r_inf)
            .map(|k| (chart.sum_inf[k] - diff_inf[k]) / c(2.0, 0.0))
            .collect(),
    ];

    let mut poles = Vec::with_capacity(n);
    let mut t_x = Vec::with_capacity(n);
    for s in 0..n {
        let rs = chart.r_s[s];
        let mut diff = vec![c(0.0, 0.0); rs];
        diff[0] = chart.mono_diff_x[s];
        for (k, &tau) in chart.tau_x[s].iter().enumerate() {
            diff[k + 1] = tau * t2.powi(-(k as i32 + 1));
        }
        if chart.case_tag == ChartCase::InfEq1Single && rs >= 2 {
            diff[rs - 1] = c(2.0, 0.0) * t2.powi(-(rs as i32 - 1));
        }
        poles.push(Pole { x: (chart.x_tilde[s] - t1) / t2, r: rs });
        t_x.push([
            (0..rs).map(|k| (chart.sum_x[s][k] + diff[k]) / c(2.0, 0.0)).collect::<Vec<C>>(),
            (0..rs).map(|k| (chart.sum_x[s][k] - diff[k]) / c(2.0, 0.0)).collect::<Vec<C>>(),
        ]);
    }

    Ok(ConnectionConfig {
        structure: PoleStructure { r_inf, poles },
        t_inf,
        t_x,
        hbar: chart.hbar,
    })
}

/// Deformation vector (in the raw time coordinates) dual to a reduced time:
/// the direction along which only that reduced time moves.
pub fn dual_derivative_coefficients(
    chart: &TimeChart,
    iso: IsoTime,
) -> Result<DeformationVector> {
    let structure = chart.structure();
    let mut alpha = DeformationVector::zero(&structure);
    let t2 = chart.t2;
    match iso {
        IsoTime::Inf { j } => {
            if chart.case_tag != ChartCase::InfAtLeast3 || j == 0 || j > chart.r_inf - 3 {
                return Err(Error::WrongCase {
                    detail: format!("no reduced time τ_∞,{j} in this chart"),
                });
            }
            for k in 1..=j {
                let w = c(0.5 * binom(j - 1, k - 1), 0.0)
                    * t2.powi(k as i32)
                    * chart.t1.powi((j - k) as i32);
                alpha.a_inf[0][k - 1] = w;
                alpha.a_inf[1][k - 1] = -w;
            }
        }
        IsoTime::X { s, k } => {
            if s >= chart.n() || k == 0 || k > chart.tau_x_count(s) {
                return Err(Error::WrongCase {
                    detail: format!("no reduced time τ_X{},{k} in this chart", s + 1),
                });
            }
            let w = c(0.5, 0.0) * t2.powi(-(k as i32));
            alpha.a_x[s][0][k - 1] = w;
            alpha.a_x[s][1][k - 1] = -w;
        }
        IsoTime::Pos { s } => {
            if s < chart.free_position_start() || s >= chart.n() {
                return Err(Error::WrongCase {
                    detail: format!("pole position {} is pinned in this chart", s + 1),
                });
            }
            alpha.a_pos[s] = c(1.0, 0.0) / t2;
        }
    }
    Ok(alpha)
}

/// Shifted Darboux coordinates: q̌ = T₂q + T₁, p̌ = T₂⁻¹(p − ½P₁(q)). These
/// are invariant along every trivial deformation direction.
pub fn shift_coordinates(cfg: &ConnectionConfig, state: &DarbouxState) -> Result<DarbouxState> {
    let chart = forward_time_map(cfg)?;
    let p1 = compute_p1(cfg);
    let mut q = Vec::with_capacity(state.q.len());
    let mut p = Vec::with_capacity(state.p.len());
    for (&qj, &pj) in state.q.iter().zip(state.p.iter()) {
        q.push(chart.t2 * qj + chart.t1);
        p.push((pj - c(0.5, 0.0) * p1.evaluate(qj)?) / chart.t2);
    }
    Ok(DarbouxState { q, p })
}

/// Inverse of [`shift_coordinates`].
pub fn unshift_coordinates(
    cfg: &ConnectionConfig,
    shifted: &DarbouxState,
) -> Result<DarbouxState> {
    let chart = forward_time_map(cfg)?;
    let p1 = compute_p1(cfg);
    let mut q = Vec::with_capacity(shifted.q.len());
    let mut p = Vec::with_capacity(shifted.p.len());
    for (&qj, &pj) in shifted.q.iter().zip(shifted.p.iter()) {
        let q_raw = (qj - chart.t1) / chart.t2;
        q.push(q_raw);
        p.push(chart.t2 * pj + c(0.5, 0.0) * p1.evaluate(q_raw)?);
    }
    Ok(DarbouxState { q, p })
}

// ---------------------------------------------------------------------------
// Named trivial deformation vectors
// ---------------------------------------------------------------------------

/// Sheet-sum direction at infinity for order k: both sheets move together, so
/// the nodes are static and the momenta shift by a fixed polynomial.
pub fn vector_v_inf(structure: &PoleStructure, k: usize) -> DeformationVector {
    let mut alpha = DeformationVector::zero(structure);
    alpha.a_inf[0][k - 1] = c(1.0, 0.0);
    alpha.a_inf[1][k - 1] = c(1.0, 0.0);
    alpha
}

/// Sheet-sum direction at pole s for order k.
pub fn vector_v_x(structure: &PoleStructure, s: usize, k: usize) -> DeformationVector {
    let mut alpha = DeformationVector::zero(structure);
    alpha.a_x[s][0][k - 1] = c(1.0, 0.0);
    alpha.a_x[s][1][k - 1] = c(1.0, 0.0);
    alpha
}

/// Weighted scaling direction at infinity: α_{∞^{(i)},r} = r·t_{∞^{(i)},r_∞−1−k+r}
/// for 1 ≤ r ≤ k.
pub fn vector_u_inf(cfg: &ConnectionConfig, k: usize) -> DeformationVector {
    let mut alpha = DeformationVector::zero(&cfg.structure);
    let r_inf = cfg.r_inf();
    for r in 1..=k {
        for i in 0..2 {
            alpha.a_inf[i][r - 1] = c(r as f64, 0.0) * cfg.t_inf[i][r_inf - 1 - k + r];
        }
    }
    alpha
}

/// Weighted scaling direction at pole s.
pub fn vector_u_x(cfg: &ConnectionConfig, s: usize, k: usize) -> DeformationVector {
    let mut alpha = DeformationVector::zero(&cfg.structure);
    let rs = cfg.r_s(s);
    for r in 1..=k {
        for i in 0..2 {
            alpha.a_x[s][i][r - 1] = c(r as f64, 0.0) * cfg.t_x[s][i][rs - 1 - k + r];
        }
    }
    alpha
}

/// Dilation direction of the spectral plane: scales every time by its order,
/// counter-scales the pole data and drags the pole positions. Acts on the
/// nodes as q → e^{-τ}q, p → e^{τ}p.
pub fn vector_a(cfg: &ConnectionConfig) -> DeformationVector {
    let mut alpha = DeformationVector::zero(&cfg.structure);
    for r in 1..cfg.r_inf() {
        for i in 0..2 {
            alpha.a_inf[i][r - 1] = c(r as f64, 0.0) * cfg.t_inf[i][r];
        }
    }
    for s in 0..cfg.n() {
        for m in 1..cfg.r_s(s) {
            for i in 0..2 {
                alpha.a_x[s][i][m - 1] = -c(m as f64, 0.0) * cfg.t_x[s][i][m];
            }
        }
        alpha.a_pos[s] = -cfg.x_s(s);
    }
    alpha
}

/// Translation direction of the spectral plane: shifts every pole position by
/// −1 and mixes the times at infinity accordingly. Acts on the nodes as
/// q → q − τ with p static.
pub fn vector_b(cfg: &ConnectionConfig) -> DeformationVector {
    let mut alpha = DeformationVector::zero(&cfg.structure);
    let r_inf = cfg.r_inf();
    for r in 1..=r_inf.saturating_sub(2) {
        for i in 0..2 {
            alpha.a_inf[i][r - 1] = c(r as f64, 0.0) * cfg.t_inf[i][r + 1];
        }
    }
    for s in 0..cfg.n() {
        alpha.a_pos[s] = c(-1.0, 0.0);
    }
    alpha
}

/// Raw pole-motion direction for pole s.
pub fn vector_w(structure: &PoleStructure, s: usize) -> DeformationVector {
    let mut alpha = DeformationVector::zero(structure);
    alpha.a_pos[s] = c(1.0, 0.0);
    alpha
}

// ---------------------------------------------------------------------------
// Canonical trivial-time values and reduced Hamiltonians
// ---------------------------------------------------------------------------

/// Data needed to build a configuration with all trivial times pinned to
/// their canonical values (sheet sums 0, T₁ = 0, T₂ = 1).
#[derive(Debug, Clone)]
pub struct CanonicalData {
    pub r_inf: usize,
    pub r_s: Vec<usize>,
    /// τ_{∞,j}, j = 1..r_∞−3.
    pub tau_inf: Vec<C>,
    /// τ_{X_s,k}; one fewer entry for the single-pole order-1 case.
    pub tau_x: Vec<Vec<C>>,
    /// Pole positions; the pinned ones (per case) are overridden.
    pub x: Vec<C>,
    /// Monodromy exponent t_{∞^{(1)},0} (sheet 2 gets the negative).
    pub mono_inf: C,
    /// Monodromy exponents t_{X_s^{(1)},0}.
    pub mono_x: Vec<C>,
    pub hbar: C,
}

/// Build the unique configuration with canonical trivial times and the given
/// reduced times: sheet 2 carries the negative of sheet 1 everywhere, the
/// normalized coefficients and pinned positions are set per case.
pub fn specialize_canonical(data: &CanonicalData) -> ConnectionConfig {
    let r_inf = data.r_inf;
    let n = data.r_s.len();
    let case_tag = TimeChart::case_of(r_inf, n);

    let mut x = data.x.clone();
    match case_tag {
        ChartCase::InfAtLeast3 => {}
        ChartCase::InfEq2 | ChartCase::InfEq1Single => x[0] = c(0.0, 0.0),
        ChartCase::InfEq1Multi => {
            x[0] = c(0.0, 0.0);
            x[1] = c(1.0, 0.0);
        }
    }

    let mut sheet1_inf = vec![c(0.0, 0.0); r_inf];
    sheet1_inf[0] = data.mono_inf;
    match case_tag {
        ChartCase::InfAtLeast3 => {
            sheet1_inf[r_inf - 1] = c(1.0, 0.0);
            for (j, &tau) in data.tau_inf.iter().enumerate() {
                sheet1_inf[j + 1] = tau / c(2.0, 0.0);
            }
        }
        ChartCase::InfEq2 => sheet1_inf[1] = c(1.0, 0.0),
        _ => {}
    }

    let mut t_x = Vec::with_capacity(n);
    for s in 0..n {
        let rs = data.r_s[s];
        let mut sheet1 = vec![c(0.0, 0.0); rs];
        sheet1[0] = data.mono_x[s];
        for (k, &tau) in data.tau_x[s].iter().enumerate() {
            sheet1[k + 1] = tau / c(2.0, 0.0);
        }
        if case_tag == ChartCase::InfEq1Single && rs >= 2 {
            sheet1[rs - 1] = c(1.0, 0.0);
        }
        let sheet2: Vec<C> = sheet1.iter().map(|&v| -v).collect();
        t_x.push([sheet1, sheet2]);
    }

    ConnectionConfig {
        structure: PoleStructure {
            r_inf,
            poles: data.r_s.iter().zip(x.iter()).map(|(&r, &xv)| Pole { x: xv, r }).collect(),
        },
        t_inf: [sheet1_inf.clone(), sheet1_inf.iter().map(|&v| -v).collect()],
        t_x,
        hbar: data.hbar,
    }
}

/// Verify that a configuration sits at the canonical trivial-time values
/// (sheet-antisymmetric data plus the per-case pinned coefficients and
/// positions), within tolerance 1e−10.
pub fn ensure_canonical(cfg: &ConnectionConfig) -> Result<()> {
    const TOL: f64 = 1e-10;
    let fail = |detail: String| Err(Error::NotCanonical { detail });
    for k in 0..cfg.r_inf() {
        if cfg.tsum_inf(k).norm() > TOL {
            return fail(format!("sheet sum at infinity, order {k}, is nonzero"));
        }
    }
    for s in 0..cfg.n() {
        for k in 0..cfg.r_s(s) {
            if cfg.tsum_x(s, k).norm() > TOL {
                return fail(format!("sheet sum at pole {}, order {k}, is nonzero", s + 1));
            }
        }
    }
    match TimeChart::case_of(cfg.r_inf(), cfg.n()) {
        ChartCase::InfAtLeast3 => {
            let r = cfg.r_inf();
            if (cfg.t_inf[0][r - 1] - c(1.0, 0.0)).norm() > TOL {
                return fail("leading coefficient at infinity is not 1".into());
            }
            if cfg.t_inf[0][r - 2].norm() > TOL {
                return fail("subleading coefficient at infinity is not 0".into());
            }
        }
        ChartCase::InfEq2 => {
            if (cfg.t_inf[0][1] - c(1.0, 0.0)).norm() > TOL {
                return fail("leading coefficient at infinity is not 1".into());
            }
            if cfg.x_s(0).norm() > TOL {
                return fail("first pole position is not 0".into());
            }
        }
        ChartCase::InfEq1Multi => {
            if cfg.x_s(0).norm() > TOL {
                return fail("first pole position is not 0".into());
            }
            if (cfg.x_s(1) - c(1.0, 0.0)).norm() > TOL {
                return fail("second pole position is not 1".into());
            }
        }
        ChartCase::InfEq1Single => {
            if cfg.x_s(0).norm() > TOL {
                return fail("pole position is not 0".into());
            }
            let r1 = cfg.r_s(0);
            if (cfg.t_x[0][0][r1 - 1] - c(1.0, 0.0)).norm() > TOL {
                return fail("leading coefficient at the pole is not 1".into());
            }
        }
    }
    Ok(())
}

/// Hamiltonian of a deformation direction at canonical trivial times: the
/// pairing of the locally solved ν coefficients with the isospectral H
/// coefficients (all corrective terms of the general formula vanish here).
pub fn reduced_hamiltonian_value(
    cfg: &ConnectionConfig,
    state: &DarbouxState,
    alpha: &DeformationVector,
) -> Result<C> {
    ensure_canonical(cfg)?;
    let nu = solve_nu(cfg, alpha)?;
    let h = solve_isospectral_h(cfg, state)?;
    let mut ham = c(0.0, 0.0);
    for (k, &hk) in h.h_inf.iter().enumerate() {
        ham += nu.nu_inf_pos[k] * hk;
    }
    for s in 0..cfg.n() {
        for k in 2..=cfg.r_s(s) {
            ham -= nu.nu_x[s][k - 1] * h.h_x[s][k - 1];
        }
        ham += alpha.a_pos[s] * h.h_x[s][0];
    }
    Ok(ham)
}

/// Values of every reduced-time Hamiltonian at canonical trivial times.
#[derive(Debug, Clone, PartialEq)]
pub struct ReducedHamiltonians {
    /// One per τ_{∞,j}, j = 1..r_∞−3.
    pub ham_inf: Vec<C>,
    /// One per τ_{X_s,k} (the single-pole case drops the pinned top order).
    pub ham_x: Vec<Vec<C>>,
    /// H_{X_s,1} for every pole; the entries at free positions are the
    /// Hamiltonians of the scaled pole motions.
    pub ham_pos: Vec<C>,
}

impl ReducedHamiltonians {
    pub fn get(&self, iso: IsoTime) -> Option<C> {
        match iso {
            IsoTime::Inf { j } => self.ham_inf.get(j - 1).copied(),
            IsoTime::X { s, k } => self.ham_x.get(s)?.get(k - 1).copied(),
            IsoTime::Pos { s } => self.ham_pos.get(s).copied(),
        }
    }
}

/// All reduced-time Hamiltonians as triangular-Toeplitz combinations of the
/// isospectral H coefficients. Requires canonical trivial times.
pub fn reduced_hamiltonians(
    cfg: &ConnectionConfig,
    state: &DarbouxState,
) -> Result<ReducedHamiltonians> {
    ensure_canonical(cfg)?;
    let h = solve_isospectral_h(cfg, state)?;
    let r_inf = cfg.r_inf();
    let case_tag = TimeChart::case_of(r_inf, cfg.n());

    let mut ham_inf = Vec::new();
    if r_inf >= 4 {
        let m = r_inf - 3;
        // First column: 2, 0, then the reduced times in descending order.
        let mut fc = vec![c(2.0, 0.0), c(0.0, 0.0)];
        for i in 2..m {
            fc.push(c(2.0, 0.0) * cfg.t_inf[0][r_inf - 1 - i]);
        }
        fc.truncate(m);
        let rhs: Vec<C> = (0..m).map(|i| h.h_inf[m - 1 - i]).collect();
        let sol = lower_toeplitz_solve(&fc, &rhs)?;
        ham_inf = sol
            .iter()
            .enumerate()
            .map(|(i, &v)| v / c((i + 1) as f64, 0.0))
            .collect();
    }

    let mut ham_x = Vec::with_capacity(cfg.n());
    let mut ham_pos = Vec::with_capacity(cfg.n());
    for s in 0..cfg.n() {
        let rs = cfg.r_s(s);
        let m = rs - 1;
        let mut vals = Vec::new();
        if m >= 1 {
            let fc: Vec<C> =
                (0..m).map(|i| c(2.0, 0.0) * cfg.t_x[s][0][rs - 1 - i]).collect();
            let rhs: Vec<C> = (0..m).map(|i| h.h_x[s][rs - 1 - i]).collect();
            let sol = lower_toeplitz_solve(&fc, &rhs)?;
            vals = sol
                .iter()
                .enumerate()
                .map(|(i, &v)| v / c((i + 1) as f64, 0.0))
                .collect();
            if case_tag == ChartCase::InfEq1Single {
                // The top sheet difference is pinned by the normalization and
                // is not a reduced time.
                vals.truncate(m - 1);
            }
        }
        ham_x.push(vals);
        ham_pos.push(h.h_x[s][0]);
    }

    Ok(ReducedHamiltonians { ham_inf, ham_x, ham_pos })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::deform::solve_coefficients;
    use crate::flow::{evolution_field, hamiltonian_value, integrate_flow_field};

    // -- fixtures (all satisfy the zero residue-sum constraint) -------------

    fn fixture_r6() -> (ConnectionConfig, DarbouxState) {
        // order 6 at infinity, one simple pole: genus 4
        let cfg = ConnectionConfig {
            structure: PoleStructure { r_inf: 6, poles: vec![Pole { x: c(0.6, 0.4), r: 1 }] },
            t_inf: [
                vec![
                    c(0.12, -0.05),
                    c(0.3, 0.1),
                    c(-0.2, 0.4),
                    c(0.5, -0.3),
                    c(0.7, 0.2),
                    c(1.1, 0.3),
                ],
                vec![
                    c(0.08, 0.25),
                    c(-0.1, -0.3),
                    c(0.4, 0.1),
                    c(-0.6, 0.2),
                    c(0.1, -0.5),
                    c(-0.8, -0.1),
                ],
            ],
            t_x: vec![[vec![c(0.1, -0.1)], vec![c(-0.3, -0.1)]]],
            hbar: c(1.0, 0.0),
        };
        let state = DarbouxState {
            q: vec![c(1.3, 0.5), c(-0.9, 1.1), c(0.2, -1.4), c(-1.5, -0.6)],
            p: vec![c(0.3, -0.5), c(-0.7, 0.2), c(0.5, 0.6), c(-0.2, -0.8)],
        };
        (cfg, state)
    }

    fn fixture_r4() -> (ConnectionConfig, DarbouxState) {
        let cfg = ConnectionConfig {
            structure: PoleStructure { r_inf: 4, poles: vec![Pole { x: c(0.4, -0.3), r: 1 }] },
            t_inf: [
                vec![c(0.15, 0.0), c(0.3, 0.1), c(-0.2, 0.4), c(1.0, 0.2)],
                vec![c(-0.15, 0.0), c(-0.3, -0.1), c(0.2, -0.4), c(-1.0, -0.2)],
            ],
            t_x: vec![[vec![c(0.25, 0.1)], vec![c(-0.25, -0.1)]]],
            hbar: c(1.0, 0.0),
        };
        let state = DarbouxState {
            q: vec![c(1.4, 0.6), c(-0.9, 1.2)],
            p: vec![c(0.3, -0.5), c(-0.7, 0.2)],
        };
        (cfg, state)
    }

    fn fixture_r2() -> (ConnectionConfig, DarbouxState) {
        let cfg = ConnectionConfig {
            structure: PoleStructure { r_inf: 2, poles: vec![Pole { x: c(0.5, -0.2), r: 3 }] },
            t_inf: [vec![c(0.3, 0.1), c(1.2, -0.4)], vec![c(-0.2, 0.2), c(-0.9, 0.5)]],
            t_x: vec![[
                vec![c(0.4, 0.2), c(-0.3, 0.6), c(1.0, 0.1)],
                vec![c(-0.5, -0.5), c(0.5, -0.2), c(-1.1, 0.3)],
            ]],
            hbar: c(1.0, 0.0),
        };
        let state = DarbouxState {
            q: vec![c(1.8, 0.4), c(-1.1, -0.9)],
            p: vec![c(0.2, 0.5), c(-0.6, -0.1)],
        };
        (cfg, state)
    }

    fn fixture_r1_n2() -> (ConnectionConfig, DarbouxState) {
        let cfg = ConnectionConfig {
            structure: PoleStructure {
                r_inf: 1,
                poles: vec![Pole { x: c(0.3, 0.2), r: 2 }, Pole { x: c(-0.8, -0.6), r: 2 }],
            },
            t_inf: [vec![c(0.4, 0.1)], vec![c(-0.6, 0.3)]],
            t_x: vec![
                [vec![c(0.2, -0.3), c(1.1, 0.4)], vec![c(-0.5, 0.1), c(-0.9, -0.2)]],
                [vec![c(0.7, 0.2), c(0.8, -0.5)], vec![c(-0.2, -0.4), c(-1.2, 0.3)]],
            ],
            hbar: c(1.0, 0.0),
        };
        let state = DarbouxState {
            q: vec![c(1.5, 0.7), c(-1.6, 1.1)],
            p: vec![c(0.4, -0.2), c(-0.3, 0.6)],
        };
        (cfg, state)
    }

    fn fixture_r1_n1() -> (ConnectionConfig, DarbouxState) {
        // single pole of order 3 and simple pole at infinity: genus 1
        let cfg = ConnectionConfig {
            structure: PoleStructure { r_inf: 1, poles: vec![Pole { x: c(-0.4, 0.3), r: 3 }] },
            t_inf: [vec![c(0.5, -0.2)], vec![c(-0.3, 0.4)]],
            t_x: vec![[
                vec![c(0.1, -0.3), c(0.6, 0.2), c(1.2, -0.5)],
                vec![c(-0.3, 0.1), c(-0.4, -0.6), c(-0.7, 0.4)],
            ]],
            hbar: c(1.0, 0.0),
        };
        let state = DarbouxState { q: vec![c(1.2, 0.8)], p: vec![c(-0.4, 0.5)] };
        (cfg, state)
    }

    fn all_fixtures() -> Vec<(ConnectionConfig, DarbouxState)> {
        vec![fixture_r6(), fixture_r4(), fixture_r2(), fixture_r1_n2(), fixture_r1_n1()]
    }

    #[allow(clippy::vec_init_then_push)]
    fn canonical_fixtures() -> Vec<(ConnectionConfig, DarbouxState)> {
        let mut out = Vec::new();
        // order at infinity 5, one pole of order 2: genus 4
        out.push((
            specialize_canonical(&CanonicalData {
                r_inf: 5,
                r_s: vec![2],
                tau_inf: vec![c(0.6, 0.2), c(-0.4, 0.3)],
                tau_x: vec![vec![c(0.8, -0.3)]],
                x: vec![c(0.5, -0.4)],
                mono_inf: c(0.3, 0.1),
                mono_x: vec![c(-0.2, 0.2)],
                hbar: c(1.0, 0.0),
            }),
            DarbouxState {
                q: vec![c(1.3, 0.5), c(-0.9, 1.1), c(1.1, -1.2), c(-1.5, -0.7)],
                p: vec![c(0.3, -0.5), c(-0.7, 0.2), c(0.5, 0.6), c(-0.2, -0.8)],
            },
        ));
        // order 2 at infinity, one pole of order 3 (pinned at 0): genus 2
        out.push((
            specialize_canonical(&CanonicalData {
                r_inf: 2,
                r_s: vec![3],
                tau_inf: vec![],
                tau_x: vec![vec![c(0.5, 0.3), c(1.4, -0.2)]],
                x: vec![c(0.0, 0.0)],
                mono_inf: c(0.25, -0.15),
                mono_x: vec![c(0.1, 0.3)],
                hbar: c(1.0, 0.0),
            }),
            DarbouxState {
                q: vec![c(1.6, 0.4), c(-1.2, -0.8)],
                p: vec![c(0.2, 0.5), c(-0.6, -0.1)],
            },
        ));
        // order 1 at infinity, poles pinned at 0 and 1 plus a free one: genus 2
        out.push((
            specialize_canonical(&CanonicalData {
                r_inf: 1,
                r_s: vec![2, 1, 2],
                tau_inf: vec![],
                tau_x: vec![vec![c(0.9, 0.2)], vec![], vec![c(-0.7, 0.4)]],
                x: vec![c(0.0, 0.0), c(0.0, 0.0), c(-0.6, 0.8)],
                mono_inf: c(0.2, -0.3),
                mono_x: vec![c(0.4, 0.1), c(-0.3, 0.2), c(0.15, -0.25)],
                hbar: c(1.0, 0.0),
            }),
            DarbouxState {
                q: vec![c(1.7, 0.6), c(-1.3, 1.0), c(0.4, -1.5)],
                p: vec![c(0.4, -0.2), c(-0.3, 0.6), c(0.7, 0.1)],
            },
        ));
        // order 1 at infinity, single pole of order 4 pinned at 0: genus 2
        out.push((
            specialize_canonical(&CanonicalData {
                r_inf: 1,
                r_s: vec![4],
                tau_inf: vec![],
                tau_x: vec![vec![c(0.5, -0.3), c(-0.4, 0.6)]],
                x: vec![c(0.0, 0.0)],
                mono_inf: c(0.35, 0.2),
                mono_x: vec![c(-0.1, -0.3)],
                hbar: c(1.0, 0.0),
            }),
            DarbouxState {
                q: vec![c(1.4, 0.9), c(-1.1, -1.3)],
                p: vec![c(-0.4, 0.5), c(0.6, 0.3)],
            },
        ));
        out
    }

    fn assert_close(a: C, b: C, tol: f64, what: &str) {
        assert!((a - b).norm() < tol, "{what}: {a} vs {b} (|Δ| = {:.3e})", (a - b).norm());
    }

    // -- chart construction and round trips ----------------------------------

    #[test]
    fn canonical_chart_is_trivial() {
        for (cfg, _) in canonical_fixtures() {
            let chart = forward_time_map(&cfg).unwrap();
            assert_close(chart.t2, c(1.0, 0.0), 1e-12, "T2");
            assert_close(chart.t1, c(0.0, 0.0), 1e-12, "T1");
            for (j, &tau) in chart.tau_inf.iter().enumerate() {
                assert_close(tau, c(2.0, 0.0) * cfg.t_inf[0][j + 1], 1e-12, "tau_inf");
            }
            for s in 0..cfg.n() {
                for (k, &tau) in chart.tau_x[s].iter().enumerate() {
                    assert_close(tau, c(2.0, 0.0) * cfg.t_x[s][0][k + 1], 1e-12, "tau_x");
                }
                assert_close(chart.x_tilde[s], cfg.x_s(s), 1e-12, "x_tilde");
            }
            assert_eq!(chart.iso_times().len(), cfg.genus());
        }
    }

    #[test]
    fn round_trip_config_chart_config() {
        for (cfg, _) in all_fixtures() {
            let chart = forward_time_map(&cfg).unwrap();
            assert_eq!(chart.iso_times().len(), cfg.genus());
            let back = inverse_time_map(&chart).unwrap();
            for i in 0..2 {
                for k in 0..cfg.r_inf() {
                    assert_close(
                        back.t_inf[i][k],
                        cfg.t_inf[i][k],
                        1e-10,
                        &format!("t_inf[{i}][{k}] (r_inf={})", cfg.r_inf()),
                    );
                }
            }
            for s in 0..cfg.n() {
                assert_close(back.x_s(s), cfg.x_s(s), 1e-10, "pole position");
                for i in 0..2 {
                    for k in 0..cfg.r_s(s) {
                        assert_close(
                            back.t_x[s][i][k],
                            cfg.t_x[s][i][k],
                            1e-10,
                            &format!("t_x[{s}][{i}][{k}] (r_inf={})", cfg.r_inf()),
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn round_trip_chart_config_chart() {
        for (cfg, _) in all_fixtures() {
            let chart = forward_time_map(&cfg).unwrap();
            let chart2 = forward_time_map(&inverse_time_map(&chart).unwrap()).unwrap();
            assert_close(chart2.t1, chart.t1, 1e-10, "T1");
            assert_close(chart2.t2, chart.t2, 1e-10, "T2");
            for (a, b) in chart2.tau_inf.iter().zip(chart.tau_inf.iter()) {
                assert_close(*a, *b, 1e-10, "tau_inf");
            }
            for s in 0..chart.n() {
                for (a, b) in chart2.tau_x[s].iter().zip(chart.tau_x[s].iter()) {
                    assert_close(*a, *b, 1e-10, "tau_x");
                }
                assert_close(chart2.x_tilde[s], chart.x_tilde[s], 1e-10, "x_tilde");
            }
        }
    }

    #[test]
    fn zero_scale_is_rejected() {
        let (mut cfg, _) = fixture_r4();
        cfg.t_inf[1][3] = cfg.t_inf[0][3];
        assert!(matches!(forward_time_map(&cfg), Err(Error::InvalidConfig(_))));
    }

    // -- shifted coordinates --------------------------------------------------

    #[test]
    fn shift_round_trip_and_canonical_identity() {
        for (cfg, state) in all_fixtures() {
            let shifted = shift_coordinates(&cfg, &state).unwrap();
            let back = unshift_coordinates(&cfg, &shifted).unwrap();
            for j in 0..cfg.genus() {
                assert_close(back.q[j], state.q[j], 1e-13, "q round trip");
                assert_close(back.p[j], state.p[j], 1e-13, "p round trip");
            }
        }
        for (cfg, state) in canonical_fixtures() {
            let shifted = shift_coordinates(&cfg, &state).unwrap();
            for j in 0..cfg.genus() {
                assert_close(shifted.q[j], state.q[j], 1e-12, "canonical q identity");
                assert_close(shifted.p[j], state.p[j], 1e-12, "canonical p identity");
            }
        }
    }

    // -- dual deformation vectors ---------------------------------------------

    #[test]
    fn dual_vectors_at_canonical_chart() {
        let (cfg, _) = &canonical_fixtures()[0];
        let chart = forward_time_map(cfg).unwrap();
        let a = dual_derivative_coefficients(&chart, IsoTime::X { s: 0, k: 1 }).unwrap();
        assert_close(a.a_x[0][0][0], c(0.5, 0.0), 1e-12, "sheet-1 weight");
        assert_close(a.a_x[0][1][0], c(-0.5, 0.0), 1e-12, "sheet-2 weight");
        let a = dual_derivative_coefficients(&chart, IsoTime::Pos { s: 0 }).unwrap();
        assert_close(a.a_pos[0], c(1.0, 0.0), 1e-12, "position weight");
        let a = dual_derivative_coefficients(&chart, IsoTime::Inf { j: 2 }).unwrap();
        assert_close(a.a_inf[0][1], c(0.5, 0.0), 1e-12, "top polynomial weight");
        assert_close(a.a_inf[0][0], c(0.0, 0.0), 1e-12, "lower polynomial weight");
        assert!(dual_derivative_coefficients(&chart, IsoTime::Inf { j: 3 }).is_err());
    }

    #[test]
    fn dual_vector_binomial_weights() {
        // Non-canonical chart: the polynomial direction mixes orders with
        // binomial weights in T1 and powers of T2.
        let (cfg, _) = fixture_r6();
        let chart = forward_time_map(&cfg).unwrap();
        let j = 3;
        let a = dual_derivative_coefficients(&chart, IsoTime::Inf { j }).unwrap();
        for k in 1..=j {
            let expect = c(0.5 * binom(j - 1, k - 1), 0.0)
                * chart.t2.powi(k as i32)
                * chart.t1.powi((j - k) as i32);
            assert_close(a.a_inf[0][k - 1], expect, 1e-12, "binomial weight");
            assert_close(a.a_inf[1][k - 1], -expect, 1e-12, "binomial weight sheet 2");
        }
        let a = dual_derivative_coefficients(&chart, IsoTime::X { s: 0, k: 0 });
        assert!(a.is_err());
    }

    #[test]
    fn single_pole_case_has_no_free_position() {
        let (cfg, _) = fixture_r1_n1();
        let chart = forward_time_map(&cfg).unwrap();
        assert_eq!(chart.case_tag, ChartCase::InfEq1Single);
        assert_eq!(chart.tau_x[0].len(), cfg.r_s(0) - 2);
        assert!(dual_derivative_coefficients(&chart, IsoTime::Pos { s: 0 }).is_err());
        assert!(dual_derivative_coefficients(&chart, IsoTime::X { s: 0, k: 1 }).is_ok());
        assert!(
            dual_derivative_coefficients(&chart, IsoTime::X { s: 0, k: cfg.r_s(0) - 1 }).is_err()
        );
    }

    // -- trivial directions: coefficient patterns -----------------------------

    #[test]
    fn sheet_sum_directions_have_pure_c_coefficients() {
        for (cfg, state) in [fixture_r6(), fixture_r4()] {
            let r_inf = cfg.r_inf();
            for j in 1..r_inf {
                let alpha = vector_v_inf(&cfg.structure, j);
                let co = solve_coefficients(&cfg, &state, &alpha).unwrap();
                assert_close(co.nu_inf_m1, c(0.0, 0.0), 1e-12, "nu m1");
                assert_close(co.nu_inf_0, c(0.0, 0.0), 1e-12, "nu 0");
                for &v in co.nu_inf_pos.iter().chain(co.nu_x.iter().flatten()) {
                    assert_close(v, c(0.0, 0.0), 1e-12, "nu");
                }
                for k in 1..r_inf {
                    let expect =
                        if k == j { c(-1.0 / j as f64, 0.0) } else { c(0.0, 0.0) };
                    assert_close(co.c_inf[k], expect, 1e-12, "c at infinity");
                }
                for &v in co.c_x.iter().flatten() {
                    assert_close(v, c(0.0, 0.0), 1e-12, "c at poles");
                }
            }
            for s in 0..cfg.n() {
                for j in 1..cfg.r_s(s) {
                    let alpha = vector_v_x(&cfg.structure, s, j);
                    let co = solve_coefficients(&cfg, &state, &alpha).unwrap();
                    for &v in co.nu_inf_pos.iter().chain(co.nu_x.iter().flatten()) {
                        assert_close(v, c(0.0, 0.0), 1e-12, "nu");
                    }
                    for k in 1..r_inf {
                        assert_close(co.c_inf[k], c(0.0, 0.0), 1e-12, "c at infinity");
                    }
                    for (s2, cx) in co.c_x.iter().enumerate() {
                        for (i, &v) in cx.iter().enumerate() {
                            let expect = if s2 == s && i + 1 == j {
                                c(-1.0 / j as f64, 0.0)
                            } else {
                                c(0.0, 0.0)
                            };
                            assert_close(v, expect, 1e-12, "c at poles");
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn weighted_scaling_directions_have_pure_nu_coefficients() {
        for (cfg, _) in [fixture_r6(), fixture_r2(), fixture_r1_n2()] {
            let r_inf = cfg.r_inf();
            for j in 1..r_inf {
                let alpha = vector_u_inf(&cfg, j);
                let nu = solve_nu(&cfg, &alpha).unwrap();
                // expansion coefficient index k carries a 1 exactly at
                // k = r_inf − 2 − j, all others vanish
                let target = r_inf as i64 - 2 - j as i64;
                if r_inf >= 2 {
                    let expect = if target == -1 { c(1.0, 0.0) } else { c(0.0, 0.0) };
                    assert_close(nu.nu_inf_m1.unwrap(), expect, 1e-12, "nu m1");
                }
                if r_inf >= 3 {
                    let expect = if target == 0 { c(1.0, 0.0) } else { c(0.0, 0.0) };
                    assert_close(nu.nu_inf_0.unwrap(), expect, 1e-12, "nu 0");
                }
                for (i, &v) in nu.nu_inf_pos.iter().enumerate() {
                    let expect =
                        if target == (i + 1) as i64 { c(1.0, 0.0) } else { c(0.0, 0.0) };
                    assert_close(v, expect, 1e-12, "nu pos");
                }
                let cc = crate::deform::solve_c(&cfg, &alpha, c(0.0, 0.0)).unwrap();
                for &v in cc.c_inf[1..].iter().chain(cc.c_x.iter().flatten()) {
                    assert_close(v, c(0.0, 0.0), 1e-12, "c");
                }
            }
            for s in 0..cfg.n() {
                for j in 1..cfg.r_s(s) {
                    let alpha = vector_u_x(&cfg, s, j);
                    let nu = solve_nu(&cfg, &alpha).unwrap();
                    for (s2, col) in nu.nu_x.iter().enumerate() {
                        for (k, &v) in col.iter().enumerate().skip(1) {
                            let expect = if s2 == s && k == cfg.r_s(s) - j {
                                c(-1.0, 0.0)
                            } else {
                                c(0.0, 0.0)
                            };
                            assert_close(v, expect, 1e-12, "nu at pole");
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn dilation_and_translation_coefficient_patterns() {
        for (cfg, _) in all_fixtures() {
            let nu_a = solve_nu(&cfg, &vector_a(&cfg)).unwrap();
            let nu_b = solve_nu(&cfg, &vector_b(&cfg)).unwrap();
            for s in 0..cfg.n() {
                assert_close(nu_a.nu_x[s][0], cfg.x_s(s), 1e-12, "dilation nu_x0");
                assert_close(nu_b.nu_x[s][0], c(1.0, 0.0), 1e-12, "translation nu_x0");
                for k in 1..cfg.r_s(s) {
                    let expect = if k == 1 { c(1.0, 0.0) } else { c(0.0, 0.0) };
                    assert_close(nu_a.nu_x[s][k], expect, 1e-12, "dilation nu_x");
                    assert_close(nu_b.nu_x[s][k], c(0.0, 0.0), 1e-12, "translation nu_x");
                }
            }
            if cfg.r_inf() >= 2 {
                assert_close(nu_a.nu_inf_m1.unwrap(), c(1.0, 0.0), 1e-12, "dilation nu m1");
                assert_close(nu_b.nu_inf_m1.unwrap(), c(0.0, 0.0), 1e-12, "translation nu m1");
            }
            if cfg.r_inf() >= 3 {
                assert_close(nu_a.nu_inf_0.unwrap(), c(0.0, 0.0), 1e-12, "dilation nu 0");
                assert_close(nu_b.nu_inf_0.unwrap(), c(1.0, 0.0), 1e-12, "translation nu 0");
                for &v in nu_a.nu_inf_pos.iter().chain(nu_b.nu_inf_pos.iter()) {
                    assert_close(v, c(0.0, 0.0), 1e-12, "higher nu");
                }
            }
        }
    }

    // -- trivial directions: evolution identities -----------------------------

    fn field_for(
        cfg: &ConnectionConfig,
        state: &DarbouxState,
        alpha: &DeformationVector,
    ) -> (Vec<C>, Vec<C>) {
        let h = solve_isospectral_h(cfg, state).unwrap();
        let co = solve_coefficients(cfg, state, alpha).unwrap();
        evolution_field(cfg, state, &co, &h)
    }

    #[test]
    fn trivial_directions_move_nodes_in_closed_form() {
        for (cfg, state) in all_fixtures() {
            let hbar = cfg.hbar;
            let g = cfg.genus();
            for k in 1..cfg.r_inf() {
                let (dq, dp) = field_for(&cfg, &state, &vector_v_inf(&cfg.structure, k));
                for j in 0..g {
                    assert_close(dq[j], c(0.0, 0.0), 1e-9, "sheet-sum dq");
                    let expect = -hbar * state.q[j].powi(k as i32 - 1);
                    assert_close(dp[j], expect, 1e-9, "sheet-sum dp");
                }
            }
            for s in 0..cfg.n() {
                for k in 1..cfg.r_s(s) {
                    let (dq, dp) = field_for(&cfg, &state, &vector_v_x(&cfg.structure, s, k));
                    for j in 0..g {
                        assert_close(dq[j], c(0.0, 0.0), 1e-9, "pole sheet-sum dq");
                        let expect =
                            hbar * (state.q[j] - cfg.x_s(s)).powi(-(k as i32) - 1);
                        assert_close(dp[j], expect, 1e-9, "pole sheet-sum dp");
                    }
                }
            }
            let (dq, dp) = field_for(&cfg, &state, &vector_a(&cfg));
            for j in 0..g {
                assert_close(dq[j], -hbar * state.q[j], 1e-9, "dilation dq");
                assert_close(dp[j], hbar * state.p[j], 1e-9, "dilation dp");
            }
            let (dq, dp) = field_for(&cfg, &state, &vector_b(&cfg));
            for j in 0..g {
                assert_close(dq[j], -hbar, 1e-9, "translation dq");
                assert_close(dp[j], c(0.0, 0.0), 1e-9, "translation dp");
            }
        }
    }

    #[test]
    fn trivial_flows_preserve_shifted_coordinates() {
        for (cfg, state) in [fixture_r6(), fixture_r2(), fixture_r1_n2()] {
            let before = shift_coordinates(&cfg, &state).unwrap();
            let directions: Vec<(&str, Box<dyn Fn(&ConnectionConfig) -> DeformationVector>)> = vec![
                ("dilation", Box::new(vector_a)),
                ("translation", Box::new(vector_b)),
                ("sheet sum", Box::new(|cfg: &ConnectionConfig| {
                    if cfg.r_inf() >= 2 {
                        vector_v_inf(&cfg.structure, cfg.r_inf() - 1)
                    } else {
                        vector_v_x(&cfg.structure, 0, 1)
                    }
                })),
            ];
            for (name, dir) in directions {
                let (final_cfg, final_state) =
                    integrate_flow_field(&cfg, &state, dir, (0.0, 0.1), 1e-2, 1e-8).unwrap();
                let after = shift_coordinates(&final_cfg, &final_state).unwrap();
                for j in 0..cfg.genus() {
                    assert_close(after.q[j], before.q[j], 1e-6, &format!("{name} q"));
                    assert_close(after.p[j], before.p[j], 1e-6, &format!("{name} p"));
                }
            }
        }
    }

    // -- canonical values and reduced Hamiltonians ----------------------------

    #[test]
    fn canonical_configs_validate_and_pass_the_canonical_check() {
        let tol = crate::Tolerances::default();
        for (cfg, state) in canonical_fixtures() {
            let rep = cfg.validate(&tol);
            assert!(rep.ok, "{:?}", rep.failures);
            let rep = cfg.validate_state(&state, &tol);
            assert!(rep.ok, "{:?}", rep.failures);
            ensure_canonical(&cfg).unwrap();
        }
        let (cfg, state) = fixture_r4();
        assert!(matches!(ensure_canonical(&cfg), Err(Error::NotCanonical { .. })));
        assert!(reduced_hamiltonians(&cfg, &state).is_err());
    }

    #[test]
    fn reduced_hamiltonians_match_the_general_formula() {
        for (cfg, state) in canonical_fixtures() {
            let chart = forward_time_map(&cfg).unwrap();
            let red = reduced_hamiltonians(&cfg, &state).unwrap();
            let iso = chart.iso_times();
            assert_eq!(iso.len(), cfg.genus());
            let h = solve_isospectral_h(&cfg, &state).unwrap();
            let scale = h
                .h_inf
                .iter()
                .chain(h.h_x.iter().flatten())
                .map(|v| v.norm())
                .fold(1.0_f64, f64::max);
            for id in iso {
                let alpha = dual_derivative_coefficients(&chart, id).unwrap();
                let co = solve_coefficients(&cfg, &state, &alpha).unwrap();
                let full = hamiltonian_value(&cfg, &state, &co, &h);
                let via_nu = reduced_hamiltonian_value(&cfg, &state, &alpha).unwrap();
                let via_combo = red.get(id).unwrap();
                assert_close(via_nu, full, 1e-10 * scale, &format!("{id:?} nu-pairing"));
                assert_close(via_combo, full, 1e-10 * scale, &format!("{id:?} combination"));
            }
            // pole-motion Hamiltonians are the order-1 isospectral coefficients
            for s in 0..cfg.n() {
                assert_close(red.ham_pos[s], h.h_x[s][0], 1e-14, "position Hamiltonian");
            }
        }
    }
}
