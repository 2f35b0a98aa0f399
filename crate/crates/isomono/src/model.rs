//! Input data of the problem: pole structure, irregular times and monodromy
//! exponents on two sheets, Darboux coordinates, deformation vectors, and the
//! two fixed rational functions P₁ and P̃₂ they determine.

use crate::rational::RationalFunction;
use crate::scalar::C;
use crate::Tolerances;

/// A finite pole: location and order.
#[derive(Debug, Clone, PartialEq)]
pub struct Pole {
    pub x: C,
    pub r: usize,
}

/// Pole structure: order at infinity plus the finite poles.
#[derive(Debug, Clone, PartialEq)]
pub struct PoleStructure {
    pub r_inf: usize,
    pub poles: Vec<Pole>,
}

impl PoleStructure {
    pub fn n(&self) -> usize {
        self.poles.len()
    }

    /// g = r_∞ − 3 + Σ_s r_s (may be ≤ 0 for invalid structures).
    pub fn genus_signed(&self) -> i64 {
        self.r_inf as i64 - 3 + self.poles.iter().map(|p| p.r as i64).sum::<i64>()
    }

    pub fn genus(&self) -> usize {
        self.genus_signed().max(0) as usize
    }

    /// Dimension of the deformation space: 2g + 4 − n.
    pub fn deformation_dim(&self) -> usize {
        (2 * self.genus_signed() + 4 - self.n() as i64).max(0) as usize
    }
}

/// Complete connection datum: structure, per-sheet times (index k = 0 holds
/// the monodromy exponent), and ħ.
#[derive(Debug, Clone, PartialEq)]
pub struct ConnectionConfig {
    pub structure: PoleStructure,
    /// Times at infinity per sheet: `t_inf[i][k]`, k = 0..r_inf−1.
    pub t_inf: [Vec<C>; 2],
    /// Times at finite pole s per sheet: `t_x[s][i][k]`, k = 0..r_s−1.
    pub t_x: Vec<[Vec<C>; 2]>,
    pub hbar: C,
}

/// Validation outcome: per-invariant failure messages, never a bare panic.
#[derive(Debug, Clone, Default)]
pub struct ValidationReport {
    pub ok: bool,
    pub failures: Vec<String>,
    pub warnings: Vec<String>,
}

impl ConnectionConfig {
    pub fn genus(&self) -> usize {
        self.structure.genus()
    }

    pub fn n(&self) -> usize {
        self.structure.n()
    }

    pub fn r_inf(&self) -> usize {
        self.structure.r_inf
    }

    pub fn r_s(&self, s: usize) -> usize {
        self.structure.poles[s].r
    }

    pub fn x_s(&self, s: usize) -> C {
        self.structure.poles[s].x
    }

    /// Sheet difference t^{(1)} − t^{(2)} at infinity.
    pub fn tdiff_inf(&self, k: usize) -> C {
        self.t_inf[0][k] - self.t_inf[1][k]
    }

    pub fn tsum_inf(&self, k: usize) -> C {
        self.t_inf[0][k] + self.t_inf[1][k]
    }

    pub fn tdiff_x(&self, s: usize, k: usize) -> C {
        self.t_x[s][0][k] - self.t_x[s][1][k]
    }

    pub fn tsum_x(&self, s: usize, k: usize) -> C {
        self.t_x[s][0][k] + self.t_x[s][1][k]
    }

    /// Exchange the two sheets everywhere (symmetry probe for tests).
    pub fn sheet_swapped(&self) -> Self {
        let mut out = self.clone();
        out.t_inf.swap(0, 1);
        for tx in out.t_x.iter_mut() {
            tx.swap(0, 1);
        }
        out
    }

    /// Check every structural invariant; failures are collected, not thrown.
    pub fn validate(&self, tol: &Tolerances) -> ValidationReport {
        let mut rep = ValidationReport { ok: true, failures: Vec::new(), warnings: Vec::new() };
        let fail = |rep: &mut ValidationReport, msg: String| {
            rep.ok = false;
            rep.failures.push(msg);
        };

        let n = self.n();
        if self.structure.r_inf < 1 {
            fail(&mut rep, "order at infinity must be at least 1".into());
        }
        if self.structure.genus_signed() <= 0 {
            fail(
                &mut rep,
                format!("genus must be positive, got {}", self.structure.genus_signed()),
            );
        }
        for s in 0..n {
            for s2 in (s + 1)..n {
                if (self.x_s(s) - self.x_s(s2)).norm() <= tol.sep {
                    fail(&mut rep, format!("poles not distinct: X_{} and X_{}", s + 1, s2 + 1));
                }
            }
            if self.structure.poles[s].r < 1 {
                fail(&mut rep, format!("pole order r_{} must be at least 1", s + 1));
            }
        }

        // shape of the time arrays
        for i in 0..2 {
            if self.t_inf[i].len() != self.structure.r_inf {
                fail(
                    &mut rep,
                    format!(
                        "sheet {} times at infinity must have length r_inf = {}",
                        i + 1,
                        self.structure.r_inf
                    ),
                );
            }
        }
        if self.t_x.len() != n {
            fail(&mut rep, format!("expected times for {} finite poles", n));
        }
        for (s, tx) in self.t_x.iter().enumerate() {
            for i in 0..2 {
                if tx[i].len() != self.structure.poles[s].r {
                    fail(
                        &mut rep,
                        format!(
                            "sheet {} times at pole {} must have length r_{} = {}",
                            i + 1,
                            s + 1,
                            s + 1,
                            self.structure.poles[s].r
                        ),
                    );
                }
            }
        }
        if !rep.ok {
            return rep; // index-dependent checks below assume correct shapes
        }

        // all entries finite
        let finite = |z: &C| z.re.is_finite() && z.im.is_finite();
        let all_finite = self.t_inf.iter().flatten().all(finite)
            && self.t_x.iter().flat_map(|tx| tx.iter().flatten()).all(finite)
            && self.structure.poles.iter().all(|p| finite(&p.x))
            && finite(&self.hbar);
        if !all_finite {
            fail(&mut rep, "non-finite value in configuration".into());
        }

        // unramified leading coefficients
        let r_inf = self.structure.r_inf;
        if self.tdiff_inf(r_inf - 1).norm() <= tol.sep {
            fail(&mut rep, "ramified pole at infinity: leading times coincide".into());
        }
        for s in 0..n {
            let r = self.r_s(s);
            if self.tdiff_x(s, r - 1).norm() <= tol.sep {
                fail(&mut rep, format!("ramified pole at X_{}: leading times coincide", s + 1));
            }
        }

        // residue-sum constraint on the monodromy exponents
        let mut res_sum = self.tsum_inf(0);
        for s in 0..n {
            res_sum += self.tsum_x(s, 0);
        }
        if res_sum.norm() >= tol.res {
            let msg = format!(
                "residue sum of monodromy exponents is {:.3e}, exceeds {:.1e}",
                res_sum.norm(),
                tol.res
            );
            if tol.residue_warn_only {
                rep.warnings.push(msg);
            } else {
                fail(&mut rep, msg);
            }
        }
        rep
    }

    /// Check the Darboux-state distinctness invariants against this config.
    pub fn validate_state(&self, state: &DarbouxState, tol: &Tolerances) -> ValidationReport {
        let mut rep = ValidationReport { ok: true, failures: Vec::new(), warnings: Vec::new() };
        let g = self.genus();
        if state.q.len() != g || state.p.len() != g {
            rep.ok = false;
            rep.failures.push(format!("state must hold {} (q, p) pairs", g));
            return rep;
        }
        for j in 0..g {
            for i in (j + 1)..g {
                if (state.q[j] - state.q[i]).norm() <= tol.sep {
                    rep.ok = false;
                    rep.failures.push(format!("q_{} and q_{} coincide", j + 1, i + 1));
                }
            }
            for s in 0..self.n() {
                if (state.q[j] - self.x_s(s)).norm() <= tol.sep {
                    rep.ok = false;
                    rep.failures.push(format!("q_{} hits pole X_{}", j + 1, s + 1));
                }
            }
        }
        rep
    }
}

/// Spectral Darboux coordinates (q_j, p_j), j = 1..g.
#[derive(Debug, Clone, PartialEq)]
pub struct DarbouxState {
    pub q: Vec<C>,
    pub p: Vec<C>,
}

/// Deformation direction: the α coefficients of the general deformation
/// operator (irregular-time directions on both sheets plus pole motions).
/// Monodromy exponents (k = 0) are never deformed.
#[derive(Debug, Clone, PartialEq)]
pub struct DeformationVector {
    /// `a_inf[i][k-1]` = α_{∞^{(i+1)},k} for k = 1..r_inf−1.
    pub a_inf: [Vec<C>; 2],
    /// `a_x[s][i][k-1]` = α_{X_s^{(i+1)},k} for k = 1..r_s−1.
    pub a_x: Vec<[Vec<C>; 2]>,
    /// `a_pos[s]` = α_{X_s}.
    pub a_pos: Vec<C>,
}

impl DeformationVector {
    pub fn zero(structure: &PoleStructure) -> Self {
        let zeros_inf = vec![C::new(0.0, 0.0); structure.r_inf.saturating_sub(1)];
        DeformationVector {
            a_inf: [zeros_inf.clone(), zeros_inf],
            a_x: structure
                .poles
                .iter()
                .map(|p| {
                    let z = vec![C::new(0.0, 0.0); p.r.saturating_sub(1)];
                    [z.clone(), z]
                })
                .collect(),
            a_pos: vec![C::new(0.0, 0.0); structure.n()],
        }
    }

    /// Total number of α entries; must equal 2g + 4 − n.
    pub fn dim(&self) -> usize {
        self.a_inf[0].len()
            + self.a_inf[1].len()
            + self.a_x.iter().map(|x| x[0].len() + x[1].len()).sum::<usize>()
            + self.a_pos.len()
    }

    /// Sheet difference α^{(1)} − α^{(2)} at infinity for k ≥ 1.
    pub fn adiff_inf(&self, k: usize) -> C {
        self.a_inf[0][k - 1] - self.a_inf[1][k - 1]
    }

    pub fn adiff_x(&self, s: usize, k: usize) -> C {
        self.a_x[s][0][k - 1] - self.a_x[s][1][k - 1]
    }

    /// self + scale · other (same structure assumed).
    pub fn axpy(&self, scale: C, other: &Self) -> Self {
        let mut out = self.clone();
        for i in 0..2 {
            for (a, b) in out.a_inf[i].iter_mut().zip(other.a_inf[i].iter()) {
                *a += scale * b;
            }
        }
        for (ax, bx) in out.a_x.iter_mut().zip(other.a_x.iter()) {
            for i in 0..2 {
                for (a, b) in ax[i].iter_mut().zip(bx[i].iter()) {
                    *a += scale * b;
                }
            }
        }
        for (a, b) in out.a_pos.iter_mut().zip(other.a_pos.iter()) {
            *a += scale * b;
        }
        out
    }

    pub fn scaled(&self, scale: C) -> Self {
        DeformationVector {
            a_inf: [
                self.a_inf[0].iter().map(|a| scale * a).collect(),
                self.a_inf[1].iter().map(|a| scale * a).collect(),
            ],
            a_x: self
                .a_x
                .iter()
                .map(|x| {
                    [
                        x[0].iter().map(|a| scale * a).collect(),
                        x[1].iter().map(|a| scale * a).collect(),
                    ]
                })
                .collect(),
            a_pos: self.a_pos.iter().map(|a| scale * a).collect(),
        }
    }
}

/// P₁(λ): polynomial coefficients −(t_{∞^{(1)},k+1}+t_{∞^{(2)},k+1}) for
/// k = 0..r_∞−2, and (t_{X_s^{(1)},k−1}+t_{X_s^{(2)},k−1}) at order k = 1..r_s
/// of each finite pole. Note the monodromy sums enter at the finite poles.
pub fn compute_p1(cfg: &ConnectionConfig) -> RationalFunction {
    let r_inf = cfg.r_inf();
    let poly: Vec<C> = (0..r_inf.saturating_sub(1)).map(|k| -cfg.tsum_inf(k + 1)).collect();
    let mut f = RationalFunction::from_poly(poly);
    for s in 0..cfg.n() {
        let r = cfg.r_s(s);
        let coeffs: Vec<C> = (1..=r).map(|k| cfg.tsum_x(s, k - 1)).collect();
        f = f.add(&RationalFunction {
            poly: Vec::new(),
            parts: vec![crate::rational::PrincipalPart { point: cfg.x_s(s), coeffs }],
        });
    }
    f.trimmed()
}

/// P̃₂(λ): the part of the sheet-product P₂ fixed by the times alone — the
/// polynomial orders j = max(0, r_∞−3)..2r_∞−4 at infinity and the orders
/// j = r_s+1..2r_s at each finite pole, with convolution coefficients
/// Σ_i t^{(1)}_{r−1−i} t^{(2)}_{r−1−(k−i)}.
pub fn compute_p2_tilde(cfg: &ConnectionConfig) -> RationalFunction {
    let r_inf = cfg.r_inf() as i64;
    let mut poly = Vec::new();
    let hi = 2 * r_inf - 4;
    if hi >= 0 {
        poly = vec![C::new(0.0, 0.0); (hi + 1) as usize];
        let lo = (r_inf - 3).max(0);
        for j in lo..=hi {
            let k = (hi - j) as usize;
            let mut acc = C::new(0.0, 0.0);
            for i in 0..=k {
                let k1 = cfg.r_inf() - 1 - i;
                let k2 = cfg.r_inf() - 1 - (k - i);
                acc += cfg.t_inf[0][k1] * cfg.t_inf[1][k2];
            }
            poly[j as usize] = acc;
        }
    }
    let mut f = RationalFunction::from_poly(poly);
    for s in 0..cfg.n() {
        let r = cfg.r_s(s);
        let mut coeffs = vec![C::new(0.0, 0.0); 2 * r];
        for k in 0..r {
            let j = 2 * r - k; // pole order of this term
            let mut acc = C::new(0.0, 0.0);
            for i in 0..=k {
                acc += cfg.t_x[s][0][r - 1 - i] * cfg.t_x[s][1][r - 1 - (k - i)];
            }
            coeffs[j - 1] = acc;
        }
        f = f.add(&RationalFunction {
            poly: Vec::new(),
            parts: vec![crate::rational::PrincipalPart { point: cfg.x_s(s), coeffs }],
        });
    }
    f.trimmed()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::c;

    fn zero_times(r: usize) -> Vec<C> {
        vec![c(0.0, 0.0); r]
    }

    /// r_inf = 4, n = 0 configuration with antisymmetric sheets:
    /// t^{(1)} = (theta, t/2, 0, 1), t^{(2)} = −t^{(1)}.
    fn quartic_infinity(t: f64, theta: f64) -> ConnectionConfig {
        let sheet1 = vec![c(theta, 0.0), c(t / 2.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)];
        let sheet2 = sheet1.iter().map(|z| -z).collect();
        ConnectionConfig {
            structure: PoleStructure { r_inf: 4, poles: vec![] },
            t_inf: [sheet1, sheet2],
            t_x: vec![],
            hbar: c(1.0, 0.0),
        }
    }

    #[test]
    fn genus_examples() {
        assert_eq!(PoleStructure { r_inf: 4, poles: vec![] }.genus(), 1);
        let p6 = PoleStructure {
            r_inf: 1,
            poles: vec![
                Pole { x: c(0.0, 0.0), r: 1 },
                Pole { x: c(1.0, 0.0), r: 1 },
                Pole { x: c(2.0, 0.0), r: 1 },
            ],
        };
        assert_eq!(p6.genus(), 1);
        assert_eq!(PoleStructure { r_inf: 5, poles: vec![] }.genus(), 2);
    }

    #[test]
    fn validate_ok_simple() {
        let cfg = quartic_infinity(0.4, 0.7);
        let rep = cfg.validate(&Tolerances::default());
        assert!(rep.ok, "{:?}", rep.failures);
    }

    #[test]
    fn validate_coincident_poles() {
        let mut cfg = quartic_infinity(0.4, 0.7);
        cfg.structure.poles = vec![Pole { x: c(0.0, 0.0), r: 1 }, Pole { x: c(0.0, 0.0), r: 1 }];
        cfg.t_x = vec![
            [vec![c(1.0, 0.0)], vec![c(-1.0, 0.0)]],
            [vec![c(2.0, 0.0)], vec![c(-2.0, 0.0)]],
        ];
        let rep = cfg.validate(&Tolerances::default());
        assert!(!rep.ok);
        assert!(rep.failures.iter().any(|f| f.contains("not distinct")));
    }

    #[test]
    fn validate_ramified_infinity() {
        let mut cfg = quartic_infinity(0.4, 0.7);
        cfg.t_inf[1][3] = cfg.t_inf[0][3];
        let rep = cfg.validate(&Tolerances::default());
        assert!(!rep.ok);
        assert!(rep.failures.iter().any(|f| f.contains("ramified pole at infinity")));
    }

    #[test]
    fn residue_constraint_warning_mode() {
        let mut cfg = quartic_infinity(0.4, 0.7);
        cfg.t_inf[1][0] = c(0.5, 0.0); // breaks the residue sum
        assert!(!cfg.validate(&Tolerances::default()).ok);
        let tol = Tolerances { residue_warn_only: true, ..Default::default() };
        let rep = cfg.validate(&tol);
        assert!(rep.ok);
        assert_eq!(rep.warnings.len(), 1);
    }

    #[test]
    fn p1_vanishes_for_antisymmetric_sheets() {
        let cfg = quartic_infinity(0.9, -0.3);
        assert_eq!(compute_p1(&cfg), RationalFunction::zero());
    }

    #[test]
    fn p1_constant_case() {
        // r_inf = 2, t_{∞^{(1)},1} = 2, t_{∞^{(2)},1} = 1, n = 0 → constant −3
        let cfg = ConnectionConfig {
            structure: PoleStructure { r_inf: 2, poles: vec![] },
            t_inf: [vec![c(0.0, 0.0), c(2.0, 0.0)], vec![c(0.0, 0.0), c(1.0, 0.0)]],
            t_x: vec![],
            hbar: c(1.0, 0.0),
        };
        let p1 = compute_p1(&cfg);
        assert_eq!(p1.poly, vec![c(-3.0, 0.0)]);
        assert!(p1.parts.is_empty());
    }

    #[test]
    fn p1_zero_times() {
        let cfg = ConnectionConfig {
            structure: PoleStructure { r_inf: 4, poles: vec![] },
            t_inf: [zero_times(4), zero_times(4)],
            t_x: vec![],
            hbar: c(1.0, 0.0),
        };
        assert_eq!(compute_p1(&cfg), RationalFunction::zero());
        assert_eq!(compute_p2_tilde(&cfg), RationalFunction::zero());
    }

    #[test]
    fn p2_tilde_quartic_case() {
        // −λ⁴ − tλ² − 2θλ for the quartic-infinity data.
        let (t, theta) = (0.8, 0.25);
        let cfg = quartic_infinity(t, theta);
        let f = compute_p2_tilde(&cfg);
        let expect = [c(0.0, 0.0),
            c(-2.0 * theta, 0.0),
            c(-t, 0.0),
            c(0.0, 0.0),
            c(-1.0, 0.0)];
        assert_eq!(f.poly.len(), 5);
        for (a, b) in f.poly.iter().zip(expect.iter()) {
            assert!((a - b).norm() < 1e-14);
        }
    }

    #[test]
    fn p2_tilde_leading_pole_coefficient() {
        // principal part at X_s has exactly r_s coefficients beyond order r_s,
        // with leading coefficient t^{(1)}_{r_s−1} t^{(2)}_{r_s−1}
        let cfg = ConnectionConfig {
            structure: PoleStructure {
                r_inf: 2,
                poles: vec![Pole { x: c(0.5, 0.0), r: 2 }],
            },
            t_inf: [vec![c(0.3, 0.0), c(1.0, 0.0)], vec![c(-0.3, 0.0), c(-1.0, 0.0)]],
            t_x: vec![[vec![c(0.0, 0.0), c(2.0, 0.0)], vec![c(0.0, 0.0), c(-3.0, 0.0)]]],
            hbar: c(1.0, 0.0),
        };
        let f = compute_p2_tilde(&cfg);
        let part = f.parts.iter().find(|p| p.point == c(0.5, 0.0)).unwrap();
        assert_eq!(part.coeffs.len(), 4); // orders up to 2 r_s
        assert!((part.coeffs[3] - c(-6.0, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn sheet_swap_preserves_p1_p2() {
        let cfg = ConnectionConfig {
            structure: PoleStructure {
                r_inf: 3,
                poles: vec![Pole { x: c(1.2, -0.4), r: 2 }],
            },
            t_inf: [
                vec![c(0.1, 0.2), c(-0.5, 0.1), c(1.0, 0.3)],
                vec![c(-0.1, -0.2), c(0.4, 0.0), c(-0.9, 0.2)],
            ],
            t_x: vec![[vec![c(0.0, 0.0), c(0.7, -0.1)], vec![c(0.0, 0.0), c(-0.3, 0.6)]]],
            hbar: c(1.0, 0.0),
        };
        let sw = cfg.sheet_swapped();
        assert_eq!(compute_p1(&cfg), compute_p1(&sw));
        assert_eq!(compute_p2_tilde(&cfg), compute_p2_tilde(&sw));
    }

    #[test]
    fn deformation_dimension() {
        let cfg = quartic_infinity(0.4, 0.7);
        let v = DeformationVector::zero(&cfg.structure);
        assert_eq!(v.dim(), cfg.structure.deformation_dim());
        assert_eq!(v.dim(), 2 * cfg.genus() + 4 - cfg.n());
    }
}
