//! Lax matrices in four gauges (companion, check, tilde, c), the Q
//! interpolation polynomial, the η₀ gauge coefficient, the isospectral H
//! coefficients, the classical spectral curve and the Wronskian shape.
//!
//! The numerical core is generic over [`Scalar`] so the same formulas can be
//! evaluated on dual numbers when a deformation derivative of the gauge data
//! is needed.

use crate::linalg::solve_generic;
use crate::model::{compute_p1, compute_p2_tilde, ConnectionConfig, DarbouxState};
use crate::rational::{PrincipalPart, RationalFunction};
use crate::scalar::{Scalar, C};
use crate::{Error, Result};

/// Coefficients H_{∞,0..r_∞−4} and H_{X_s,1..r_s} of the companion-gauge
/// (2,1) entry; deformation-independent.
#[derive(Debug, Clone, PartialEq)]
pub struct IsospectralHamiltonians {
    pub h_inf: Vec<C>,
    pub h_x: Vec<Vec<C>>,
}

/// Gauge tag for a Lax matrix.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Gauge {
    Companion,
    Check,
    Tilde,
    C,
}

/// 2×2 Lax matrix with rational-function entries.
#[derive(Debug, Clone, PartialEq)]
pub struct LaxMatrix {
    pub gauge: Gauge,
    pub m: [[RationalFunction; 2]; 2],
}

impl LaxMatrix {
    pub fn evaluate(&self, lam: C) -> Result<[[C; 2]; 2]> {
        Ok([
            [self.m[0][0].evaluate(lam)?, self.m[0][1].evaluate(lam)?],
            [self.m[1][0].evaluate(lam)?, self.m[1][1].evaluate(lam)?],
        ])
    }
}

// ---------------------------------------------------------------------------
// Generic parameter bundle
// ---------------------------------------------------------------------------

/// All scalar data of a (config, state) pair, over a generic scalar type.
#[derive(Debug, Clone)]
pub(crate) struct GenParams<T> {
    pub r_inf: usize,
    pub rs: Vec<usize>,
    pub x: Vec<T>,
    pub t_inf: [Vec<T>; 2],
    pub t_x: Vec<[Vec<T>; 2]>,
    pub hbar: T,
    pub q: Vec<T>,
    pub p: Vec<T>,
}

impl GenParams<C> {
    pub fn new(cfg: &ConnectionConfig, state: &DarbouxState) -> Self {
        GenParams {
            r_inf: cfg.r_inf(),
            rs: cfg.structure.poles.iter().map(|p| p.r).collect(),
            x: cfg.structure.poles.iter().map(|p| p.x).collect(),
            t_inf: cfg.t_inf.clone(),
            t_x: cfg.t_x.clone(),
            hbar: cfg.hbar,
            q: state.q.clone(),
            p: state.p.clone(),
        }
    }
}

impl<T: Scalar> GenParams<T> {
    pub fn n(&self) -> usize {
        self.rs.len()
    }

    pub fn genus(&self) -> usize {
        (self.r_inf as i64 - 3 + self.rs.iter().map(|&r| r as i64).sum::<i64>()).max(0) as usize
    }

    fn tsum_inf(&self, k: usize) -> T {
        self.t_inf[0][k] + self.t_inf[1][k]
    }

    fn tsum_x(&self, s: usize, k: usize) -> T {
        self.t_x[s][0][k] + self.t_x[s][1][k]
    }
}

/// P₁ evaluated at λ over a generic scalar.
pub(crate) fn p1_at<T: Scalar>(gp: &GenParams<T>, lam: T) -> T {
    let mut acc = T::zero();
    for k in (0..gp.r_inf.saturating_sub(1)).rev() {
        acc = acc * lam - gp.tsum_inf(k + 1);
    }
    let mut out = acc;
    for s in 0..gp.n() {
        let inv = T::one() / (lam - gp.x[s]);
        let mut part = T::zero();
        for k in (1..=gp.rs[s]).rev() {
            part = (part + gp.tsum_x(s, k - 1)) * inv;
        }
        out = out + part;
    }
    out
}

/// dP₁/dλ at λ over a generic scalar.
pub(crate) fn p1_prime_at<T: Scalar>(gp: &GenParams<T>, lam: T) -> T {
    let mut out = T::zero();
    for k in 1..gp.r_inf.saturating_sub(1) {
        out = out + T::from_f(-(k as f64)) * gp.tsum_inf(k + 1) * lam.powi(k as i32 - 1);
    }
    for s in 0..gp.n() {
        for k in 1..=gp.rs[s] {
            out = out
                + T::from_f(-(k as f64)) * gp.tsum_x(s, k - 1) * (lam - gp.x[s]).powi(-(k as i32) - 1);
        }
    }
    out
}

/// Convolution coefficient Σ_i t^{(1)}_{r−1−i} t^{(2)}_{r−1−(k−i)}.
fn conv_coeff<T: Scalar>(t1: &[T], t2: &[T], r: usize, k: usize) -> T {
    let mut acc = T::zero();
    for i in 0..=k {
        acc = acc + t1[r - 1 - i] * t2[r - 1 - (k - i)];
    }
    acc
}

/// P̃₂ at λ (and with `deriv = true` its λ-derivative) over a generic scalar.
pub(crate) fn p2_tilde_at<T: Scalar>(gp: &GenParams<T>, lam: T, deriv: bool) -> T {
    let r_inf = gp.r_inf as i64;
    let mut out = T::zero();
    let hi = 2 * r_inf - 4;
    let lo = (r_inf - 3).max(0);
    if hi >= 0 {
        for j in lo..=hi {
            let k = (hi - j) as usize;
            let coeff = conv_coeff(&gp.t_inf[0], &gp.t_inf[1], gp.r_inf, k);
            if deriv {
                if j > 0 {
                    out = out + T::from_f(j as f64) * coeff * lam.powi((j - 1) as i32);
                }
            } else {
                out = out + coeff * lam.powi(j as i32);
            }
        }
    }
    for s in 0..gp.n() {
        let r = gp.rs[s];
        for k in 0..r {
            let j = (2 * r - k) as i32; // pole order of this term
            let coeff = conv_coeff(&gp.t_x[s][0], &gp.t_x[s][1], r, k);
            if deriv {
                out = out + T::from_f(-(j as f64)) * coeff * (lam - gp.x[s]).powi(-j - 1);
            } else {
                out = out + coeff * (lam - gp.x[s]).powi(-j);
            }
        }
    }
    out
}

/// Q(λ) in Lagrange form: the unique degree-(g−1) polynomial with
/// Q(q_i) = −p_i Π_s (q_i − X_s)^{r_s} (empty products are 1).
pub(crate) fn q_at<T: Scalar>(gp: &GenParams<T>, lam: T) -> T {
    let g = gp.q.len();
    let mut out = T::zero();
    for i in 0..g {
        let mut term = -gp.p[i];
        for s in 0..gp.n() {
            term = term * (gp.q[i] - gp.x[s]).powi(gp.rs[s] as i32);
        }
        for j in 0..g {
            if j != i {
                term = term * (lam - gp.q[j]) / (gp.q[i] - gp.q[j]);
            }
        }
        out = out + term;
    }
    out
}

/// H coefficients over a generic scalar. The column order of the system is
/// (H_{∞,0..r_∞−4}, H_{X_1,1..r_1}, …, H_{X_n,1..r_n}); rows are the g node
/// rows followed by the extra normalization rows for r_∞ ≤ 2.
#[derive(Debug, Clone)]
pub(crate) struct GenHams<T> {
    pub h_inf: Vec<T>,
    pub h_x: Vec<Vec<T>>,
}

pub(crate) fn solve_h_generic<T: Scalar>(gp: &GenParams<T>) -> Result<GenHams<T>> {
    let g = gp.genus();
    let n = gp.n();
    let r_inf = gp.r_inf;
    let n_inf = r_inf.saturating_sub(3); // count of H_{∞,·} unknowns
    let n_cols = n_inf + gp.rs.iter().sum::<usize>();
    let extra = match r_inf {
        1 => 2,
        2 => 1,
        _ => 0,
    };
    debug_assert_eq!(g + extra, n_cols);

    let mut a: Vec<Vec<T>> = Vec::with_capacity(n_cols);
    let mut b: Vec<T> = Vec::with_capacity(n_cols);

    for j in 0..g {
        let qj = gp.q[j];
        let pj = gp.p[j];
        let mut row = Vec::with_capacity(n_cols);
        for i in 0..n_inf {
            row.push(qj.powi(i as i32));
        }
        for s in 0..n {
            for k in 1..=gp.rs[s] {
                row.push((qj - gp.x[s]).powi(-(k as i32)));
            }
        }
        // rhs: p² − P₁(q)p + p Σ ħ r_s/(q−X_s) + P̃₂(q)
        //      + ħ Σ_{i≠j}(p_i−p_j)/(q_j−q_i) + ħ t_{∞^{(1)},r_∞−1} q^{r_∞−3} (r_∞ ≥ 3)
        let mut rhs = pj * pj - p1_at(gp, qj) * pj + p2_tilde_at(gp, qj, false);
        for s in 0..n {
            rhs = rhs + pj * gp.hbar * T::from_f(gp.rs[s] as f64) / (qj - gp.x[s]);
        }
        for i in 0..g {
            if i != j {
                rhs = rhs + gp.hbar * (gp.p[i] - pj) / (qj - gp.q[i]);
            }
        }
        if r_inf >= 3 {
            rhs = rhs + gp.hbar * gp.t_inf[0][r_inf - 1] * qj.powi(r_inf as i32 - 3);
        }
        a.push(row);
        b.push(rhs);
    }

    // Extra rows for the low orders at infinity, appended last.
    if r_inf == 2 {
        let mut row = vec![T::zero(); n_cols];
        let mut idx = n_inf;
        for s in 0..n {
            row[idx] = T::one(); // H_{X_s,1} column
            idx += gp.rs[s];
        }
        let mut rhs = T::zero();
        for &pj in &gp.p {
            rhs = rhs + gp.hbar * pj;
        }
        rhs = rhs
            - (gp.t_inf[0][1] * gp.t_inf[1][0]
                + gp.t_inf[1][1] * gp.t_inf[0][0]
                + gp.hbar * gp.t_inf[0][1]);
        a.push(row);
        b.push(rhs);
    } else if r_inf == 1 {
        // Σ X_s H_{X_s,1} + Σ H_{X_s,2} = ħ Σ q_j p_j + Σ t^{(1)}_{X_s,0} t^{(2)}_{X_s,0} δ_{r_s=1}
        //                                 − t_{∞^{(1)},0}(t_{∞^{(2)},0} + ħ)
        let mut row = vec![T::zero(); n_cols];
        let mut idx = n_inf;
        for s in 0..n {
            row[idx] = gp.x[s];
            if gp.rs[s] >= 2 {
                row[idx + 1] = T::one();
            }
            idx += gp.rs[s];
        }
        let mut rhs = T::zero();
        for j in 0..g {
            rhs = rhs + gp.hbar * gp.q[j] * gp.p[j];
        }
        for s in 0..n {
            if gp.rs[s] == 1 {
                rhs = rhs + gp.t_x[s][0][0] * gp.t_x[s][1][0];
            }
        }
        rhs = rhs - gp.t_inf[0][0] * (gp.t_inf[1][0] + gp.hbar);
        a.push(row);
        b.push(rhs);

        // Σ H_{X_s,1} = ħ Σ p_j
        let mut row2 = vec![T::zero(); n_cols];
        let mut idx = n_inf;
        for s in 0..n {
            row2[idx] = T::one();
            idx += gp.rs[s];
        }
        let mut rhs2 = T::zero();
        for &pj in &gp.p {
            rhs2 = rhs2 + gp.hbar * pj;
        }
        a.push(row2);
        b.push(rhs2);
    }

    let sol = solve_generic(a, &b)?;
    let h_inf = sol[..n_inf].to_vec();
    let mut h_x = Vec::with_capacity(n);
    let mut idx = n_inf;
    for s in 0..n {
        h_x.push(sol[idx..idx + gp.rs[s]].to_vec());
        idx += gp.rs[s];
    }
    Ok(GenHams { h_inf, h_x })
}

/// η₀ of the normalization gauge. For r_∞ ≥ 2 it depends on times and nodes
/// only; for r_∞ = 1 it involves the H coefficients and the order-2/3
/// convolution data at the finite poles.
pub(crate) fn eta0_generic<T: Scalar>(gp: &GenParams<T>, h: Option<&GenHams<T>>) -> Result<T> {
    let sum_nodes = {
        let mut acc = T::zero();
        for &qj in &gp.q {
            acc = acc + qj;
        }
        for s in 0..gp.n() {
            acc = acc - T::from_f(gp.rs[s] as f64) * gp.x[s];
        }
        acc
    };
    if gp.r_inf >= 2 {
        return Ok(gp.t_inf[0][gp.r_inf - 2] + gp.t_inf[0][gp.r_inf - 1] * sum_nodes);
    }
    let h = h.ok_or(Error::MissingHamiltonians)?;
    let t10 = gp.t_inf[0][0];
    let t20 = gp.t_inf[1][0];
    let mut acc = T::zero();
    for s in 0..gp.n() {
        let r = gp.rs[s];
        // −(2 X_s P^{(2)}_{X_s,2} δ_{r_s=1} + P^{(2)}_{X_s,3} δ_{r_s=2})
        match r {
            1 => {
                let p2 = conv_coeff(&gp.t_x[s][0], &gp.t_x[s][1], 1, 0); // order 2
                acc = acc - T::from_f(2.0) * gp.x[s] * p2;
            }
            2 => {
                let p3 = conv_coeff(&gp.t_x[s][0], &gp.t_x[s][1], 2, 1); // order 3
                acc = acc - p3;
            }
            _ => {}
        }
        // + X_s² H_{X_s,1} + 2 X_s H_{X_s,2} δ_{r_s≥2} + H_{X_s,3} δ_{r_s≥3}
        acc = acc + gp.x[s] * gp.x[s] * h.h_x[s][0];
        if r >= 2 {
            acc = acc + T::from_f(2.0) * gp.x[s] * h.h_x[s][1];
        }
        if r >= 3 {
            acc = acc + h.h_x[s][2];
        }
        // − t_{∞^{(1)},0} ((t^{(1)}_{X_s,1}+t^{(2)}_{X_s,1}) δ_{r_s≥2} + X_s (t^{(1)}_{X_s,0}+t^{(2)}_{X_s,0}))
        let mut inner = gp.x[s] * gp.tsum_x(s, 0);
        if r >= 2 {
            inner = inner + gp.tsum_x(s, 1);
        }
        acc = acc - t10 * inner;
    }
    for j in 0..gp.q.len() {
        acc = acc - gp.hbar * gp.p[j] * gp.q[j] * gp.q[j];
    }
    acc = acc + t10 * (t10 - t20 - gp.hbar) * sum_nodes;
    Ok(acc / (t10 - t20))
}

// ---------------------------------------------------------------------------
// Public API on plain complex values
// ---------------------------------------------------------------------------

/// The interpolation polynomial Q as an explicit polynomial in λ.
pub fn build_q_polynomial(cfg: &ConnectionConfig, state: &DarbouxState) -> Result<RationalFunction> {
    let g = cfg.genus();
    for i in 0..g {
        for j in (i + 1)..g {
            if (state.q[i] - state.q[j]).norm() <= 1e-14 {
                return Err(Error::CoincidentNodes {
                    detail: format!("q_{} and q_{} coincide", i + 1, j + 1),
                });
            }
        }
    }
    let mut coeffs = vec![C::new(0.0, 0.0)];
    for i in 0..g {
        let mut weight = -state.p[i];
        for s in 0..cfg.n() {
            weight *= (state.q[i] - cfg.x_s(s)).powi(cfg.r_s(s) as i32);
        }
        // basis polynomial Π_{j≠i} (λ − q_j)/(q_i − q_j)
        let mut basis = vec![C::new(1.0, 0.0)];
        for j in 0..g {
            if j != i {
                weight /= state.q[i] - state.q[j];
                basis = crate::rational::poly_mul(&basis, &[-state.q[j], C::new(1.0, 0.0)]);
            }
        }
        if coeffs.len() < basis.len() {
            coeffs.resize(basis.len(), C::new(0.0, 0.0));
        }
        for (k, &bk) in basis.iter().enumerate() {
            coeffs[k] += weight * bk;
        }
    }
    Ok(RationalFunction::from_poly(coeffs))
}

pub fn solve_isospectral_h(
    cfg: &ConnectionConfig,
    state: &DarbouxState,
) -> Result<IsospectralHamiltonians> {
    let gp = GenParams::new(cfg, state);
    let h = solve_h_generic(&gp)?;
    Ok(IsospectralHamiltonians { h_inf: h.h_inf, h_x: h.h_x })
}

pub fn compute_eta0(
    cfg: &ConnectionConfig,
    state: &DarbouxState,
    h: Option<&IsospectralHamiltonians>,
) -> Result<C> {
    let gp = GenParams::new(cfg, state);
    let gh = h.map(|h| GenHams { h_inf: h.h_inf.clone(), h_x: h.h_x.clone() });
    eta0_generic(&gp, gh.as_ref())
}

/// Companion gauge: first row (0, 1); the two nontrivial entries carry the
/// fixed data (P₁, P̃₂), the H coefficients and the Darboux poles.
pub fn build_l_companion(
    cfg: &ConnectionConfig,
    state: &DarbouxState,
    h: &IsospectralHamiltonians,
) -> Result<LaxMatrix> {
    let g = cfg.genus();
    let hbar = cfg.hbar;
    let r_inf = cfg.r_inf();

    let mut l21 = compute_p2_tilde(cfg).neg();
    if !h.h_inf.is_empty() {
        l21 = l21.add(&RationalFunction::from_poly(h.h_inf.clone()));
    }
    for s in 0..cfg.n() {
        l21 = l21.add(&RationalFunction {
            poly: Vec::new(),
            parts: vec![PrincipalPart { point: cfg.x_s(s), coeffs: h.h_x[s].clone() }],
        });
    }
    if r_inf >= 3 {
        let mut poly = vec![C::new(0.0, 0.0); r_inf - 2];
        poly[r_inf - 3] = -hbar * cfg.t_inf[0][r_inf - 1];
        l21 = l21.add(&RationalFunction::from_poly(poly));
    }
    for j in 0..g {
        l21 = l21.add(&RationalFunction::pole_term(state.q[j], 1, -hbar * state.p[j]));
    }

    let mut l22 = compute_p1(cfg);
    for j in 0..g {
        l22 = l22.add(&RationalFunction::pole_term(state.q[j], 1, hbar));
    }
    for s in 0..cfg.n() {
        l22 = l22.add(&RationalFunction::pole_term(
            cfg.x_s(s),
            1,
            -hbar * C::new(cfg.r_s(s) as f64, 0.0),
        ));
    }

    Ok(LaxMatrix {
        gauge: Gauge::Companion,
        m: [
            [RationalFunction::zero(), RationalFunction::constant(C::new(1.0, 0.0))],
            [l21, l22],
        ],
    })
}

/// Π_j (λ − q_j) as a polynomial.
fn node_product(state: &DarbouxState) -> Vec<C> {
    let mut p = vec![C::new(1.0, 0.0)];
    for &qj in &state.q {
        p = crate::rational::poly_mul(&p, &[-qj, C::new(1.0, 0.0)]);
    }
    p
}

/// Π_s (λ − X_s)^{r_s} as a polynomial.
fn pole_product(cfg: &ConnectionConfig) -> Vec<C> {
    let mut p = vec![C::new(1.0, 0.0)];
    for s in 0..cfg.n() {
        for _ in 0..cfg.r_s(s) {
            p = crate::rational::poly_mul(&p, &[-cfg.x_s(s), C::new(1.0, 0.0)]);
        }
    }
    p
}

/// Intermediate gauge with no apparent singularities.
pub fn build_l_check(
    cfg: &ConnectionConfig,
    state: &DarbouxState,
    h: &IsospectralHamiltonians,
) -> Result<LaxMatrix> {
    let l = build_l_companion(cfg, state, h)?;
    let qpoly = build_q_polynomial(cfg, state)?;
    let xs: Vec<(C, usize)> = cfg.structure.poles.iter().map(|p| (p.x, p.r)).collect();
    let qs: Vec<(C, usize)> = state.q.iter().map(|&q| (q, 1)).collect();

    // Q/ΠX, Πq/ΠX, Q/Πq, ΠX/Πq as re-expanded rational functions
    let q_over_x = RationalFunction::from_poles(qpoly.poly.clone(), &xs);
    let nodes_over_x = RationalFunction::from_poles(node_product(state), &xs);
    let q_over_nodes = RationalFunction::from_poles(qpoly.poly.clone(), &qs);
    let x_over_nodes = RationalFunction::from_poles(pole_product(cfg), &qs);

    let p1 = compute_p1(cfg);
    let l11 = q_over_x.neg();
    let l12 = nodes_over_x.clone();
    let l22 = p1.add(&q_over_x);
    let l21 = q_over_nodes
        .differentiate()
        .scale(cfg.hbar)
        .add(&l.m[1][0].mul(&x_over_nodes))
        .sub(&p1.mul(&q_over_nodes))
        .sub(&q_over_nodes.mul(&q_over_x));

    Ok(LaxMatrix { gauge: Gauge::Check, m: [[l11, l12], [l21, l22]] })
}

/// Normalized gauge: unipotent shear of the check gauge by
/// g₁(λ) = t_{∞^{(1)},r_∞−1} λ + η₀.
pub fn build_l_tilde(
    cfg: &ConnectionConfig,
    state: &DarbouxState,
    h: &IsospectralHamiltonians,
) -> Result<LaxMatrix> {
    let check = build_l_check(cfg, state, h)?;
    let eta0 = compute_eta0(cfg, state, Some(h))?;
    let t_lead = cfg.t_inf[0][cfg.r_inf() - 1];
    let g1 = RationalFunction::from_poly(vec![eta0, t_lead]);

    let c11 = &check.m[0][0];
    let c12 = &check.m[0][1];
    let c21 = &check.m[1][0];
    let c22 = &check.m[1][1];

    let l11 = c11.sub(&g1.mul(c12));
    let l12 = c12.clone();
    let l21 = c21
        .sub(&g1.mul(&g1).mul(c12))
        .add(&g1.mul(&c11.sub(c22)))
        .add(&RationalFunction::constant(cfg.hbar * t_lead));
    let l22 = c22.add(&g1.mul(c12));

    Ok(LaxMatrix { gauge: Gauge::Tilde, m: [[l11, l12], [l21, l22]] })
}

/// The gauge with off-diagonal node/pole products: −det L_c = L₂₁.
pub fn build_l_c(
    cfg: &ConnectionConfig,
    state: &DarbouxState,
    h: &IsospectralHamiltonians,
) -> Result<LaxMatrix> {
    let l = build_l_companion(cfg, state, h)?;
    let xs: Vec<(C, usize)> = cfg.structure.poles.iter().map(|p| (p.x, p.r)).collect();
    let qs: Vec<(C, usize)> = state.q.iter().map(|&q| (q, 1)).collect();
    let b = RationalFunction::from_poles(node_product(state), &xs);
    let c_ent = RationalFunction::from_poles(pole_product(cfg), &qs).mul(&l.m[1][0]);
    Ok(LaxMatrix {
        gauge: Gauge::C,
        m: [[RationalFunction::zero(), b], [c_ent, compute_p1(cfg)]],
    })
}

/// The H coefficients recovered from residues of ½Tr(L_c²) − ½P₁² at the
/// poles; exercised as an independent oracle against `solve_isospectral_h`.
pub fn h_from_residues(
    cfg: &ConnectionConfig,
    state: &DarbouxState,
    h: &IsospectralHamiltonians,
) -> Result<IsospectralHamiltonians> {
    let lc = build_l_c(cfg, state, h)?;
    // ½Tr(L_c²) − ½P₁² = b·c (the diagonal contributes exactly ½P₁²)
    let f = lc.m[0][1].mul(&lc.m[1][0]);
    let r_inf = cfg.r_inf();
    let h_inf = (0..r_inf.saturating_sub(3)).map(|j| f.coeff_infinity(j)).collect();
    let mut h_x = Vec::with_capacity(cfg.n());
    for s in 0..cfg.n() {
        let mut hx = Vec::with_capacity(cfg.r_s(s));
        for j in 1..=cfg.r_s(s) {
            hx.push(f.residue_at(cfg.x_s(s), j - 1)?);
        }
        h_x.push(hx);
    }
    Ok(IsospectralHamiltonians { h_inf, h_x })
}

/// The ħ → 0 spectral curve y² − P₁ y + P₂ = 0. Returns (P₁, P₂) with
/// P₂ = P̃₂ − Σ H_{∞,j} λ^j − Σ_s Σ_j H_{X_s,j} (λ−X_s)^{−j}; every
/// explicitly ħ-scaled term of the Lax entries is dropped, while the solved H
/// values are kept.
pub fn classical_spectral_curve(
    cfg: &ConnectionConfig,
    _state: &DarbouxState,
    h: &IsospectralHamiltonians,
) -> (RationalFunction, RationalFunction) {
    let p1 = compute_p1(cfg);
    let mut p2 = compute_p2_tilde(cfg);
    if !h.h_inf.is_empty() {
        p2 = p2.sub(&RationalFunction::from_poly(h.h_inf.clone()));
    }
    for s in 0..cfg.n() {
        p2 = p2.sub(&RationalFunction {
            poly: Vec::new(),
            parts: vec![PrincipalPart { point: cfg.x_s(s), coeffs: h.h_x[s].clone() }],
        });
    }
    (p1, p2)
}

/// Π_j(λ−q_j)/Π_s(λ−X_s)^{r_s} · exp(ħ^{-1} ∫₀^λ P₁), with the overall
/// constant fixed to 1. Principal branch for the logarithms.
pub fn wronskian_shape(cfg: &ConnectionConfig, state: &DarbouxState, lam: C) -> Result<C> {
    let mut pref = C::new(1.0, 0.0);
    for &qj in &state.q {
        pref *= lam - qj;
    }
    for s in 0..cfg.n() {
        let d = lam - cfg.x_s(s);
        if d.norm() <= crate::rational::EVAL_SEP {
            return Err(Error::EvaluationAtPole { point: cfg.x_s(s), dist: d.norm() });
        }
        pref /= d.powi(cfg.r_s(s) as i32);
    }
    // ∫₀^λ P₁: antiderivative of the polynomial part plus log/power terms.
    let p1 = compute_p1(cfg);
    let mut integral = C::new(0.0, 0.0);
    for (k, &a) in p1.poly.iter().enumerate() {
        integral += a * lam.powi(k as i32 + 1) / C::new((k + 1) as f64, 0.0);
    }
    for part in &p1.parts {
        let x = part.point;
        if (lam - x).norm() <= crate::rational::EVAL_SEP || x.norm() <= crate::rational::EVAL_SEP {
            return Err(Error::EvaluationAtPole { point: x, dist: (lam - x).norm().min(x.norm()) });
        }
        for (i, &a) in part.coeffs.iter().enumerate() {
            let k = (i + 1) as i32;
            if k == 1 {
                integral += a * ((lam - x).ln() - (-x).ln());
            } else {
                integral += a * ((lam - x).powi(1 - k) - (-x).powi(1 - k))
                    / C::new((1 - k) as f64, 0.0);
            }
        }
    }
    Ok(pref * (integral / cfg.hbar).exp())
}
