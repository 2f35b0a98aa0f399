//! Arithmetic on rational functions of λ kept in the form
//! `polynomial + Σ_c Σ_k a_k (λ − c)^{−k}` (polynomial part plus principal
//! parts at marked points). Products re-expand principal parts through
//! closed-form partial fractions so that residues stay exactly accessible.

use crate::scalar::C;
use crate::{Error, Result};

/// Separation below which evaluation at a point counts as hitting a pole.
pub const EVAL_SEP: f64 = 1e-8;

/// Relative threshold for trimming negligible coefficients after arithmetic.
const TRIM_REL: f64 = 1e-13;

/// Principal part at a single marked point: `Σ_{k=1}^{d} coeffs[k-1] (λ − point)^{−k}`.
#[derive(Debug, Clone, PartialEq)]
pub struct PrincipalPart {
    pub point: C,
    pub coeffs: Vec<C>,
}

/// Rational function with poles at its marked points (and possibly at ∞).
#[derive(Debug, Clone, PartialEq, Default)]
pub struct RationalFunction {
    /// Ascending coefficients of the polynomial part.
    pub poly: Vec<C>,
    /// Principal parts at pairwise-distinct marked points.
    pub parts: Vec<PrincipalPart>,
}

/// Binomial coefficient as f64 (sizes here are tiny).
pub fn binom(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    let mut acc = 1.0;
    for i in 0..k {
        acc = acc * (n - i) as f64 / (i + 1) as f64;
    }
    acc
}

/// Evaluate an ascending-coefficient polynomial by Horner's rule.
pub fn poly_eval(coeffs: &[C], lam: C) -> C {
    let mut acc = C::new(0.0, 0.0);
    for &a in coeffs.iter().rev() {
        acc = acc * lam + a;
    }
    acc
}

/// Product of two ascending-coefficient polynomials.
pub fn poly_mul(a: &[C], b: &[C]) -> Vec<C> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![C::new(0.0, 0.0); a.len() + b.len() - 1];
    for (i, &ai) in a.iter().enumerate() {
        for (j, &bj) in b.iter().enumerate() {
            out[i + j] += ai * bj;
        }
    }
    out
}

/// Coefficients of `p(λ + s)` given ascending coefficients of `p(λ)`
/// (iterated synthetic division, i.e. a Taylor shift).
pub fn poly_shift(coeffs: &[C], s: C) -> Vec<C> {
    let mut b = coeffs.to_vec();
    let n = b.len();
    for i in 0..n {
        for j in (i..n.saturating_sub(1)).rev() {
            let next = b[j + 1];
            b[j] += s * next;
        }
    }
    b
}

impl RationalFunction {
    pub fn zero() -> Self {
        RationalFunction::default()
    }

    pub fn constant(a: C) -> Self {
        RationalFunction { poly: vec![a], parts: Vec::new() }.trimmed()
    }

    pub fn from_poly(poly: Vec<C>) -> Self {
        RationalFunction { poly, parts: Vec::new() }.trimmed()
    }

    /// The single term `(λ − point)^{−order}` scaled by `a`.
    pub fn pole_term(point: C, order: usize, a: C) -> Self {
        let mut coeffs = vec![C::new(0.0, 0.0); order];
        coeffs[order - 1] = a;
        RationalFunction { poly: Vec::new(), parts: vec![PrincipalPart { point, coeffs }] }
            .trimmed()
    }

    /// `numerator(λ) / Π_s (λ − poles[s].0)^{poles[s].1}`, fully re-expanded.
    pub fn from_poles(numerator: Vec<C>, poles: &[(C, usize)]) -> Self {
        let mut f = RationalFunction::from_poly(numerator);
        for &(x, r) in poles {
            for _ in 0..r {
                f = f.mul(&RationalFunction::pole_term(x, 1, C::new(1.0, 0.0)));
            }
        }
        f
    }

    fn max_coeff_mag(&self) -> f64 {
        let mut m: f64 = 0.0;
        for a in &self.poly {
            m = m.max(a.norm());
        }
        for p in &self.parts {
            for a in &p.coeffs {
                m = m.max(a.norm());
            }
        }
        m
    }

    /// Canonical form: drop coefficients below `TRIM_REL` relative to the
    /// largest one, then drop empty parts and trailing polynomial zeros.
    pub fn trimmed(mut self) -> Self {
        let m = self.max_coeff_mag();
        if m == 0.0 {
            return RationalFunction { poly: Vec::new(), parts: Vec::new() };
        }
        let cut = TRIM_REL * m;
        for a in self.poly.iter_mut() {
            if a.norm() < cut {
                *a = C::new(0.0, 0.0);
            }
        }
        while self.poly.last().is_some_and(|a| a.norm() == 0.0) {
            self.poly.pop();
        }
        for p in self.parts.iter_mut() {
            for a in p.coeffs.iter_mut() {
                if a.norm() < cut {
                    *a = C::new(0.0, 0.0);
                }
            }
            while p.coeffs.last().is_some_and(|a| a.norm() == 0.0) {
                p.coeffs.pop();
            }
        }
        self.parts.retain(|p| !p.coeffs.is_empty());
        self
    }

    pub fn evaluate(&self, lam: C) -> Result<C> {
        let mut acc = poly_eval(&self.poly, lam);
        for p in &self.parts {
            let d = lam - p.point;
            if d.norm() <= EVAL_SEP {
                return Err(Error::EvaluationAtPole { point: p.point, dist: d.norm() });
            }
            let inv = C::new(1.0, 0.0) / d;
            // Horner in inv: a_1 inv + a_2 inv^2 + …
            let mut part_acc = C::new(0.0, 0.0);
            for &a in p.coeffs.iter().rev() {
                part_acc = (part_acc + a) * inv;
            }
            acc += part_acc;
        }
        Ok(acc)
    }

    pub fn differentiate(&self) -> Self {
        let poly = self
            .poly
            .iter()
            .enumerate()
            .skip(1)
            .map(|(k, &a)| a * C::new(k as f64, 0.0))
            .collect();
        let parts = self
            .parts
            .iter()
            .map(|p| {
                let mut coeffs = vec![C::new(0.0, 0.0); p.coeffs.len() + 1];
                for (i, &a) in p.coeffs.iter().enumerate() {
                    let k = i + 1;
                    coeffs[k] = -(k as f64) * a;
                }
                PrincipalPart { point: p.point, coeffs }
            })
            .collect();
        RationalFunction { poly, parts }.trimmed()
    }

    /// `Res_{λ→c} f(λ) (λ − c)^{weight}` for a finite marked point `c` and
    /// `weight ≥ 0`; equals the stored coefficient of `(λ − c)^{−weight−1}`.
    pub fn residue_at(&self, point: C, weight: usize) -> Result<C> {
        let part = self
            .parts
            .iter()
            .find(|p| p.point == point)
            .ok_or(Error::UnmarkedPoint { point })?;
        Ok(part.coeffs.get(weight).copied().unwrap_or(C::new(0.0, 0.0)))
    }

    /// Coefficient of `λ^j` in the polynomial part. For `j ≥ 0` this equals
    /// `−Res_{λ→∞} f(λ) λ^{−j−1}` (principal parts contribute nothing there).
    pub fn coeff_infinity(&self, j: usize) -> C {
        self.poly.get(j).copied().unwrap_or(C::new(0.0, 0.0))
    }

    pub fn scale(&self, a: C) -> Self {
        let mut out = self.clone();
        for x in out.poly.iter_mut() {
            *x *= a;
        }
        for p in out.parts.iter_mut() {
            for x in p.coeffs.iter_mut() {
                *x *= a;
            }
        }
        out.trimmed()
    }

    pub fn neg(&self) -> Self {
        self.scale(C::new(-1.0, 0.0))
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut poly = self.poly.clone();
        if poly.len() < other.poly.len() {
            poly.resize(other.poly.len(), C::new(0.0, 0.0));
        }
        for (i, &a) in other.poly.iter().enumerate() {
            poly[i] += a;
        }
        let mut parts: Vec<PrincipalPart> = self.parts.clone();
        for p in &other.parts {
            add_part(&mut parts, p.point, &p.coeffs);
        }
        RationalFunction { poly, parts }.trimmed()
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    /// Full product with principal parts re-expanded by partial fractions.
    pub fn mul(&self, other: &Self) -> Self {
        let mut poly = poly_mul(&self.poly, &other.poly);
        let mut parts: Vec<PrincipalPart> = Vec::new();

        // polynomial × principal parts (both orders)
        mul_poly_parts(&self.poly, &other.parts, &mut poly, &mut parts);
        mul_poly_parts(&other.poly, &self.parts, &mut poly, &mut parts);

        // principal × principal
        for pa in &self.parts {
            for pb in &other.parts {
                for (ia, &a) in pa.coeffs.iter().enumerate() {
                    if a.norm() == 0.0 {
                        continue;
                    }
                    let j = ia + 1;
                    for (ib, &b) in pb.coeffs.iter().enumerate() {
                        if b.norm() == 0.0 {
                            continue;
                        }
                        let k = ib + 1;
                        let ab = a * b;
                        if pa.point == pb.point {
                            // (λ−c)^{−j} (λ−c)^{−k} = (λ−c)^{−(j+k)}
                            let mut cs = vec![C::new(0.0, 0.0); j + k];
                            cs[j + k - 1] = ab;
                            add_part(&mut parts, pa.point, &cs);
                        } else {
                            cross_terms(pa.point, j, pb.point, k, ab, &mut parts);
                        }
                    }
                }
            }
        }

        RationalFunction { poly, parts }.trimmed()
    }
}

/// Accumulate `coeffs` into the principal part at `point` (exact point match).
fn add_part(parts: &mut Vec<PrincipalPart>, point: C, coeffs: &[C]) {
    if let Some(p) = parts.iter_mut().find(|p| p.point == point) {
        if p.coeffs.len() < coeffs.len() {
            p.coeffs.resize(coeffs.len(), C::new(0.0, 0.0));
        }
        for (i, &a) in coeffs.iter().enumerate() {
            p.coeffs[i] += a;
        }
    } else {
        parts.push(PrincipalPart { point, coeffs: coeffs.to_vec() });
    }
}

/// `poly(λ) · Σ_k a_k (λ−d)^{−k}`: Taylor-shift the polynomial to the pole,
/// split into principal and polynomial content, convert the latter back.
fn mul_poly_parts(
    poly: &[C],
    parts: &[PrincipalPart],
    out_poly: &mut Vec<C>,
    out_parts: &mut Vec<PrincipalPart>,
) {
    if poly.is_empty() {
        return;
    }
    for p in parts {
        // b_m = coefficients of poly in powers of (λ − d)
        let b = poly_shift(poly, p.point);
        for (ik, &a) in p.coeffs.iter().enumerate() {
            if a.norm() == 0.0 {
                continue;
            }
            let k = ik + 1;
            // principal content: m < k contributes a·b_m (λ−d)^{m−k}
            let mut cs = vec![C::new(0.0, 0.0); k];
            for (m, &bm) in b.iter().enumerate().take(k) {
                cs[k - m - 1] = a * bm;
            }
            add_part(out_parts, p.point, &cs);
            // polynomial content: Σ_{m≥k} b_m (λ−d)^{m−k}, rebased to λ
            if b.len() > k {
                let in_u: Vec<C> = b[k..].iter().map(|&bm| a * bm).collect();
                let rebased = poly_shift(&in_u, -p.point);
                if out_poly.len() < rebased.len() {
                    out_poly.resize(rebased.len(), C::new(0.0, 0.0));
                }
                for (i, &v) in rebased.iter().enumerate() {
                    out_poly[i] += v;
                }
            }
        }
    }
}

/// Partial-fraction expansion of `ab (λ−c)^{−j} (λ−d)^{−k}` for `c ≠ d`:
/// the `(λ−c)^{−m}` coefficient is `(−1)^{j−m} C(k+j−m−1, j−m) (c−d)^{−(k+j−m)}`
/// and symmetrically at `d`.
fn cross_terms(cpt: C, j: usize, dpt: C, k: usize, ab: C, parts: &mut Vec<PrincipalPart>) {
    let cd = cpt - dpt;
    let mut cs = vec![C::new(0.0, 0.0); j];
    for m in 1..=j {
        let sign = if (j - m).is_multiple_of(2) { 1.0 } else { -1.0 };
        let coef = sign * binom(k + j - m - 1, j - m);
        cs[m - 1] = ab * C::new(coef, 0.0) * cd.powi(-((k + j - m) as i32));
    }
    add_part(parts, cpt, &cs);

    let dc = dpt - cpt;
    let mut ds = vec![C::new(0.0, 0.0); k];
    for m in 1..=k {
        let sign = if (k - m).is_multiple_of(2) { 1.0 } else { -1.0 };
        let coef = sign * binom(j + k - m - 1, k - m);
        ds[m - 1] = ab * C::new(coef, 0.0) * dc.powi(-((j + k - m) as i32));
    }
    add_part(parts, dpt, &ds);
}
