//! Ready-made configurations for the classical Painlevé equations and
//! Fuchsian systems, together with hand-coded right-hand sides of the
//! corresponding second-order ODEs. The oracles are written directly from the
//! scalar ODE forms and share no code with the matrix pipeline, so agreement
//! between an integrated flow and an oracle is a genuine cross-check.

use crate::model::{ConnectionConfig, DarbouxState, DeformationVector, Pole, PoleStructure};
use crate::scalar::{c, C};
use crate::{Error, Result};

/// Identifier of a built-in example.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PresetId {
    /// Painlevé 2: order 4 at infinity, no finite poles. Parameters: [θ].
    P2,
    /// Painlevé 3: order 2 at infinity, one order-2 pole at 0.
    /// Parameters: [θ_∞, θ_0].
    P3,
    /// Painlevé 4 with both leading coefficients at infinity normalized; the
    /// time is the pole position. Parameters: [θ_∞, θ_0].
    P4,
    /// Painlevé 4 in the alternative normalization that pins the pole at 0
    /// and keeps the subleading coefficient at infinity as the time
    /// (the Jimbo–Miwa convention). Parameters: [θ_∞, θ_0].
    P4Jm,
    /// Painlevé 5: simple pole at infinity, poles of order 1 and 2 at 0, 1.
    /// Parameters: [θ_∞, θ_1, θ_2].
    P5,
    /// Painlevé 6: simple poles at 0, 1, t and infinity.
    /// Parameters: [θ_∞, θ_1, θ_2, θ_3].
    P6,
    /// Second member of the Painlevé 2 hierarchy: order 5 at infinity, genus
    /// 2, two flows. Parameters: [θ, τ_2]; the time argument is τ_1.
    P2h2,
}

impl std::str::FromStr for PresetId {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().as_str() {
            "P2" => Ok(PresetId::P2),
            "P3" => Ok(PresetId::P3),
            "P4" => Ok(PresetId::P4),
            "P4_JM" | "P4JM" => Ok(PresetId::P4Jm),
            "P5" => Ok(PresetId::P5),
            "P6" => Ok(PresetId::P6),
            "P2H2" => Ok(PresetId::P2h2),
            other => Err(Error::UnknownPreset(other.to_string())),
        }
    }
}

impl PresetId {
    pub fn param_count(self) -> usize {
        match self {
            PresetId::P2 => 1,
            PresetId::P3 | PresetId::P4 | PresetId::P4Jm | PresetId::P2h2 => 2,
            PresetId::P5 => 3,
            PresetId::P6 => 4,
        }
    }

    pub fn genus(self) -> usize {
        match self {
            PresetId::P2h2 => 2,
            _ => 1,
        }
    }
}

/// A fully assembled example: the configuration, the deformation direction of
/// each dynamical time (one entry except for the two-flow hierarchy case),
/// and the initial node data.
#[derive(Debug, Clone)]
pub struct Preset {
    pub config: ConnectionConfig,
    pub directions: Vec<DeformationVector>,
    pub state: DarbouxState,
}

fn anti(sheet1: Vec<C>) -> [Vec<C>; 2] {
    let sheet2 = sheet1.iter().map(|&v| -v).collect();
    [sheet1, sheet2]
}

fn half_diff_inf(structure: &PoleStructure, k: usize) -> DeformationVector {
    let mut alpha = DeformationVector::zero(structure);
    alpha.a_inf[0][k - 1] = c(0.5, 0.0);
    alpha.a_inf[1][k - 1] = c(-0.5, 0.0);
    alpha
}

fn half_diff_x(structure: &PoleStructure, s: usize, k: usize) -> DeformationVector {
    let mut alpha = DeformationVector::zero(structure);
    alpha.a_x[s][0][k - 1] = c(0.5, 0.0);
    alpha.a_x[s][1][k - 1] = c(-0.5, 0.0);
    alpha
}

fn pos(structure: &PoleStructure, s: usize) -> DeformationVector {
    let mut alpha = DeformationVector::zero(structure);
    alpha.a_pos[s] = c(1.0, 0.0);
    alpha
}

/// Build one of the classical examples at time value `t` with monodromy-type
/// parameters `params` and initial nodes `(q, p)`.
pub fn painleve_preset(
    id: PresetId,
    params: &[C],
    t: C,
    q: &[C],
    p: &[C],
    hbar: C,
) -> Result<Preset> {
    if params.len() != id.param_count() {
        return Err(Error::InvalidConfig(format!(
            "preset {id:?} takes {} parameters, got {}",
            id.param_count(),
            params.len()
        )));
    }
    let g = id.genus();
    if q.len() != g || p.len() != g {
        return Err(Error::InvalidConfig(format!(
            "preset {id:?} has {g} node pairs, got {} positions and {} momenta",
            q.len(),
            p.len()
        )));
    }
    let half = c(0.5, 0.0);
    let (structure, t_inf, t_x, directions): (
        PoleStructure,
        [Vec<C>; 2],
        Vec<[Vec<C>; 2]>,
        Vec<DeformationVector>,
    ) = match id {
        PresetId::P2 => {
            let st = PoleStructure { r_inf: 4, poles: vec![] };
            let dir = half_diff_inf(&st, 1);
            (
                st,
                anti(vec![params[0], half * t, c(0.0, 0.0), c(1.0, 0.0)]),
                vec![],
                vec![dir],
            )
        }
        PresetId::P3 => {
            let st =
                PoleStructure { r_inf: 2, poles: vec![Pole { x: c(0.0, 0.0), r: 2 }] };
            let dir = half_diff_x(&st, 0, 1);
            (
                st,
                anti(vec![params[0], c(1.0, 0.0)]),
                vec![anti(vec![params[1], half * t])],
                vec![dir],
            )
        }
        PresetId::P4 => {
            let st = PoleStructure { r_inf: 3, poles: vec![Pole { x: t, r: 1 }] };
            let dir = pos(&st, 0);
            (
                st,
                anti(vec![params[0], c(0.0, 0.0), c(1.0, 0.0)]),
                vec![anti(vec![params[1]])],
                vec![dir],
            )
        }
        PresetId::P4Jm => {
            let st =
                PoleStructure { r_inf: 3, poles: vec![Pole { x: c(0.0, 0.0), r: 1 }] };
            let mut dir = DeformationVector::zero(&st);
            dir.a_inf[0][0] = c(1.0, 0.0);
            dir.a_inf[1][0] = c(-1.0, 0.0);
            (
                st,
                anti(vec![params[0], t, c(1.0, 0.0)]),
                vec![anti(vec![params[1]])],
                vec![dir],
            )
        }
        PresetId::P5 => {
            let st = PoleStructure {
                r_inf: 1,
                poles: vec![
                    Pole { x: c(0.0, 0.0), r: 1 },
                    Pole { x: c(1.0, 0.0), r: 2 },
                ],
            };
            let dir = half_diff_x(&st, 1, 1);
            (
                st,
                anti(vec![params[0]]),
                vec![anti(vec![params[1]]), anti(vec![params[2], half * t])],
                vec![dir],
            )
        }
        PresetId::P6 => {
            let st = PoleStructure {
                r_inf: 1,
                poles: vec![
                    Pole { x: c(0.0, 0.0), r: 1 },
                    Pole { x: c(1.0, 0.0), r: 1 },
                    Pole { x: t, r: 1 },
                ],
            };
            let dir = pos(&st, 2);
            (
                st,
                anti(vec![params[0]]),
                vec![
                    anti(vec![params[1]]),
                    anti(vec![params[2]]),
                    anti(vec![params[3]]),
                ],
                vec![dir],
            )
        }
        PresetId::P2h2 => {
            let st = PoleStructure { r_inf: 5, poles: vec![] };
            let dirs = vec![half_diff_inf(&st, 1), half_diff_inf(&st, 2)];
            (
                st,
                anti(vec![params[0], half * t, half * params[1], c(0.0, 0.0), c(1.0, 0.0)]),
                vec![],
                dirs,
            )
        }
    };
    Ok(Preset {
        config: ConnectionConfig { structure, t_inf, t_x, hbar },
        directions,
        state: DarbouxState { q: q.to_vec(), p: p.to_vec() },
    })
}

/// Right-hand side of the second-order scalar ODE of the example: the value
/// ħ²q̈ must take given q, ħq̇ and the time. Hand-coded from the scalar forms;
/// independent of the matrix machinery.
pub fn painleve_rhs_oracle(
    id: PresetId,
    q: C,
    hdq: C,
    t: C,
    params: &[C],
    hbar: C,
) -> Result<C> {
    if params.len() != id.param_count() {
        return Err(Error::InvalidConfig(format!(
            "preset {id:?} takes {} parameters, got {}",
            id.param_count(),
            params.len()
        )));
    }
    let one = c(1.0, 0.0);
    let two = c(2.0, 0.0);
    let half = c(0.5, 0.0);
    let singular = |what: &str| {
        Err(Error::InvalidConfig(format!(
            "node at a fixed singular point of the scalar ODE ({what})"
        )))
    };
    match id {
        PresetId::P2 => Ok(two * q.powi(3) + t * q + params[0] - half * hbar),
        PresetId::P3 => {
            if q.norm() < 1e-12 {
                return singular("q = 0");
            }
            let (alpha, beta, gamma, delta) = (
                two * (two * params[0] - hbar),
                -two * params[1],
                c(4.0, 0.0),
                -one,
            );
            Ok(hdq * hdq / q - hbar * hdq / t
                + (alpha * q * q + gamma * q.powi(3)) / (t * t)
                + beta / t
                + delta / q)
        }
        PresetId::P4 => {
            // Same equation as the alternative normalization after the shift
            // u = q − t (so ħu̇ = ħq̇ − ħ and ü = q̈).
            let u = q - t;
            if u.norm() < 1e-12 {
                return singular("q = t");
            }
            let hdu = hdq - hbar;
            Ok((half * hdu * hdu
                + c(6.0, 0.0) * u.powi(4)
                + c(8.0, 0.0) * t * u.powi(3)
                + two * (t * t + two * params[0] - hbar) * u * u
                - two * params[1] * params[1])
                / u)
        }
        PresetId::P4Jm => {
            if q.norm() < 1e-12 {
                return singular("q = 0");
            }
            Ok((half * hdq * hdq
                + c(6.0, 0.0) * q.powi(4)
                + c(8.0, 0.0) * t * q.powi(3)
                + two * (t * t + two * params[0] - hbar) * q * q
                - two * params[1] * params[1])
                / q)
        }
        PresetId::P5 => {
            if q.norm() < 1e-12 || (q - one).norm() < 1e-12 {
                return singular("q ∈ {0, 1}");
            }
            let alpha = half * (two * params[0] - hbar) * (two * params[0] - hbar);
            let beta = -two * params[1] * params[1];
            let gamma = -two * params[2];
            let delta = -half;
            Ok((half / q + one / (q - one)) * hdq * hdq - hbar * hdq / t
                + (q - one) * (q - one) / (t * t) * (alpha * q + beta / q)
                + gamma * q / t
                + delta * q * (q + one) / (q - one))
        }
        PresetId::P6 => {
            if q.norm() < 1e-12 || (q - one).norm() < 1e-12 || (q - t).norm() < 1e-12 {
                return singular("q ∈ {0, 1, t}");
            }
            let alpha = half * (two * params[0] - hbar) * (two * params[0] - hbar);
            let beta = -two * params[1] * params[1];
            let gamma = two * params[2] * params[2];
            let delta = -(two * params[3] * params[3] - half * hbar * hbar);
            Ok(half * (one / q + one / (q - one) + one / (q - t)) * hdq * hdq
                - hbar * hdq * (one / t + one / (t - one) + one / (q - t))
                + q * (q - one)
                    * (q - t)
                    * (alpha
                        + beta * t / (q * q)
                        + gamma * (t - one) / ((q - one) * (q - one))
                        + delta * t * (t - one) / ((q - t) * (q - t)))
                    / (t * t * (t - one) * (t - one)))
        }
        PresetId::P2h2 => Err(Error::InvalidConfig(
            "the hierarchy case has no single second-order scalar form here".into(),
        )),
    }
}

/// Fuchsian system: simple pole at infinity and n ≥ 3 simple finite poles,
/// the first two pinned at 0 and 1. `theta` are the finite monodromy
/// exponents, `positions` the remaining n−2 pole locations. Returns the
/// configuration and the deformation direction of each movable pole.
pub fn fuchsian_preset(
    theta_inf: C,
    theta: &[C],
    positions: &[C],
    hbar: C,
) -> Result<(ConnectionConfig, Vec<DeformationVector>)> {
    let n = theta.len();
    if n < 3 {
        return Err(Error::InvalidConfig(
            "a Fuchsian system needs at least three finite poles".into(),
        ));
    }
    if positions.len() != n - 2 {
        return Err(Error::InvalidConfig(format!(
            "expected {} movable pole positions, got {}",
            n - 2,
            positions.len()
        )));
    }
    let mut x = vec![c(0.0, 0.0), c(1.0, 0.0)];
    x.extend_from_slice(positions);
    for i in 0..n {
        for j in (i + 1)..n {
            if (x[i] - x[j]).norm() < 1e-12 {
                return Err(Error::InvalidConfig(format!(
                    "pole positions {} and {} coincide",
                    i + 1,
                    j + 1
                )));
            }
        }
    }
    let structure = PoleStructure {
        r_inf: 1,
        poles: x.iter().map(|&xv| Pole { x: xv, r: 1 }).collect(),
    };
    let directions = (2..n).map(|s| pos(&structure, s)).collect();
    let config = ConnectionConfig {
        structure,
        t_inf: anti(vec![theta_inf]),
        t_x: theta.iter().map(|&th| anti(vec![th])).collect(),
        hbar,
    };
    Ok((config, directions))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::deform::solve_coefficients;
    use crate::flow::{evolution_field, integrate_flow, StepControl};
    use crate::lax::solve_isospectral_h;
    use crate::reduction::ensure_canonical;

    fn assert_close(a: C, b: C, tol: f64, what: &str) {
        assert!((a - b).norm() < tol, "{what}: {a} vs {b} (|Δ| = {:.3e})", (a - b).norm());
    }

    fn field(preset: &Preset, dir: usize) -> (Vec<C>, Vec<C>) {
        let co = solve_coefficients(&preset.config, &preset.state, &preset.directions[dir])
            .unwrap();
        let h = solve_isospectral_h(&preset.config, &preset.state).unwrap();
        evolution_field(&preset.config, &preset.state, &co, &h)
    }

    const HBAR: C = C { re: 1.0, im: 0.0 };

    #[test]
    fn presets_are_admissible() {
        let tol = crate::Tolerances::default();
        let t = c(0.7, 0.3);
        let q = [c(1.3, 0.4)];
        let p = [c(-0.5, 0.6)];
        let th = [c(0.31, 0.12), c(-0.22, 0.41), c(0.17, -0.33), c(0.43, 0.05)];
        for id in [
            PresetId::P2,
            PresetId::P3,
            PresetId::P4,
            PresetId::P4Jm,
            PresetId::P5,
            PresetId::P6,
        ] {
            let preset =
                painleve_preset(id, &th[..id.param_count()], t, &q, &p, HBAR).unwrap();
            let rep = preset.config.validate(&tol);
            assert!(rep.ok, "{id:?}: {:?}", rep.failures);
            assert_eq!(preset.config.genus(), 1);
            assert_eq!(preset.directions.len(), 1);
        }
        let preset = painleve_preset(
            PresetId::P2h2,
            &th[..2],
            t,
            &[c(1.3, 0.4), c(-0.8, 0.9)],
            &[c(-0.5, 0.6), c(0.2, -0.7)],
            HBAR,
        )
        .unwrap();
        assert!(preset.config.validate(&tol).ok);
        assert_eq!(preset.config.genus(), 2);
        assert_eq!(preset.directions.len(), 2);
        // every preset except the alternative normalization sits at the
        // canonical trivial-time values
        for id in [PresetId::P2, PresetId::P3, PresetId::P5, PresetId::P6, PresetId::P2h2] {
            let g = id.genus();
            let preset = painleve_preset(
                id,
                &th[..id.param_count()],
                t,
                &vec![c(1.3, 0.4); g],
                &vec![c(-0.5, 0.6); g],
                HBAR,
            )
            .unwrap();
            ensure_canonical(&preset.config).unwrap();
        }
        assert!(painleve_preset(PresetId::P2, &th[..2], t, &q, &p, HBAR).is_err());
        assert!("P7".parse::<PresetId>().is_err());
    }

    #[test]
    fn p2_closed_forms() {
        let theta = c(0.37, -0.21);
        let t = c(0.9, 0.2);
        let (q, p) = (c(1.2, 0.5), c(-0.4, 0.7));
        let preset = painleve_preset(PresetId::P2, &[theta], t, &[q], &[p], HBAR).unwrap();
        let co = solve_coefficients(&preset.config, &preset.state, &preset.directions[0])
            .unwrap();
        assert_close(co.mu[0], c(0.5, 0.0), 1e-12, "mu");
        assert_close(co.nu_inf_m1, c(0.0, 0.0), 1e-12, "nu -1");
        assert_close(co.nu_inf_0, c(0.0, 0.0), 1e-12, "nu 0");
        assert_close(co.nu_inf_pos[0], c(0.5, 0.0), 1e-12, "nu 1");
        let (dq, dp) = field(&preset, 0);
        assert_close(dq[0], p, 1e-12, "dq");
        let expect = c(2.0, 0.0) * q.powi(3) + t * q + theta - c(0.5, 0.0) * HBAR;
        assert_close(dp[0], expect, 1e-12, "dp");
        // here ħ²q̈ = ħ𝓛[p], so the scalar oracle must agree with the field
        let rhs = painleve_rhs_oracle(PresetId::P2, q, dq[0], t, &[theta], HBAR).unwrap();
        assert_close(dp[0], rhs, 1e-12, "scalar oracle");
    }

    #[test]
    fn p3_closed_forms() {
        let th = [c(0.28, 0.13), c(-0.19, 0.34)];
        let t = c(1.1, -0.4);
        let (q, p) = (c(0.9, 0.6), c(-0.3, 0.5));
        let preset = painleve_preset(PresetId::P3, &th, t, &[q], &[p], HBAR).unwrap();
        let co = solve_coefficients(&preset.config, &preset.state, &preset.directions[0])
            .unwrap();
        assert_close(co.nu_x[0][1], -c(1.0, 0.0) / t, 1e-12, "nu pole 1");
        assert_close(co.nu_inf_0, q / t, 1e-12, "nu 0");
        assert_close(co.mu[0], q * q / t, 1e-12, "mu");
        let (dq, dp) = field(&preset, 0);
        assert_close(dq[0], c(2.0, 0.0) * q * q * p / t + HBAR * q / t, 1e-12, "dq");
        let expect = -c(2.0, 0.0) * q * p * p / t - HBAR * p / t
            - t / (c(2.0, 0.0) * q.powi(3))
            - th[1] / (q * q)
            + c(2.0, 0.0) * q / t
            + (c(2.0, 0.0) * th[0] - HBAR) / t;
        assert_close(dp[0], expect, 1e-12, "dp");
    }

    #[test]
    fn p4_closed_forms_both_normalizations() {
        let th = [c(0.33, -0.27), c(0.21, 0.18)];
        let t = c(0.8, 0.5);
        let (q, p) = (c(1.4, 0.3), c(-0.6, 0.4));
        // pole-position time
        let preset = painleve_preset(PresetId::P4, &th, t, &[q], &[p], HBAR).unwrap();
        let co = solve_coefficients(&preset.config, &preset.state, &preset.directions[0])
            .unwrap();
        assert_close(co.mu[0], q - t, 1e-12, "mu");
        assert_close(co.nu_inf_m1, c(0.0, 0.0), 1e-12, "nu -1");
        assert_close(co.nu_inf_0, c(0.0, 0.0), 1e-12, "nu 0");
        let (dq, dp) = field(&preset, 0);
        assert_close(dq[0], c(2.0, 0.0) * p * (q - t) + HBAR, 1e-12, "dq");
        let expect = -p * p - th[1] * th[1] / ((q - t) * (q - t))
            + c(3.0, 0.0) * q * q
            - c(2.0, 0.0) * t * q
            + c(2.0, 0.0) * th[0]
            - HBAR;
        assert_close(dp[0], expect, 1e-12, "dp");

        // subleading-coefficient time
        let preset = painleve_preset(PresetId::P4Jm, &th, t, &[q], &[p], HBAR).unwrap();
        let co = solve_coefficients(&preset.config, &preset.state, &preset.directions[0])
            .unwrap();
        assert_close(co.nu_inf_m1, c(0.0, 0.0), 1e-12, "nu -1");
        assert_close(co.nu_inf_0, c(1.0, 0.0), 1e-12, "nu 0");
        assert_close(co.mu[0], q, 1e-12, "mu");
        let (dq, dp) = field(&preset, 0);
        assert_close(dq[0], c(2.0, 0.0) * p * q, 1e-12, "dq");
        let expect = -p * p - th[1] * th[1] / (q * q)
            + (t * t - HBAR + c(2.0, 0.0) * th[0])
            + c(4.0, 0.0) * t * q
            + c(3.0, 0.0) * q * q;
        assert_close(dp[0], expect, 1e-12, "dp");

        // the two normalizations agree under the node shift u = q − t
        let shifted = painleve_preset(PresetId::P4Jm, &th, t, &[q - t], &[p], HBAR).unwrap();
        let (dq_s, dp_s) = field(&shifted, 0);
        let preset = painleve_preset(PresetId::P4, &th, t, &[q], &[p], HBAR).unwrap();
        let (dq_c, dp_c) = field(&preset, 0);
        // dq picks up the drift of the pole itself: d(q)/dt = d(u)/dt + 1
        assert_close(dq_c[0], dq_s[0] + HBAR, 1e-12, "normalization shift dq");
        assert_close(dp_c[0], dp_s[0], 1e-12, "normalization shift dp");
    }

    #[test]
    fn p5_closed_forms() {
        let th = [c(0.26, 0.11), c(-0.31, 0.22), c(0.14, -0.29)];
        let t = c(1.3, 0.6);
        let (q, p) = (c(1.7, 0.4), c(-0.2, 0.5));
        let preset = painleve_preset(PresetId::P5, &th, t, &[q], &[p], HBAR).unwrap();
        let co = solve_coefficients(&preset.config, &preset.state, &preset.directions[0])
            .unwrap();
        let one = c(1.0, 0.0);
        assert_close(co.nu_x[1][1], -one / t, 1e-12, "nu pole 2");
        assert_close(co.nu_inf_m1, (q - one) / t, 1e-12, "nu -1");
        assert_close(co.nu_inf_0, (q - one) * (q - one) / t, 1e-12, "nu 0");
        assert_close(co.mu[0], q * (q - one) * (q - one) / t, 1e-12, "mu");
        let (dq, dp) = field(&preset, 0);
        assert_close(
            dq[0],
            c(2.0, 0.0) * q * (q - one) * (q - one) * p / t + HBAR * q * (q - one) / t,
            1e-12,
            "dq",
        );
        let expect = -(c(3.0, 0.0) * q - one) * (q - one) * p * p / t
            - HBAR * (c(2.0, 0.0) * q - one) * p / t
            - th[1] * th[1] / (t * q * q)
            - t / (c(2.0, 0.0) * (q - one).powi(3))
            - (c(4.0, 0.0) * th[2] + t) / (c(4.0, 0.0) * (q - one) * (q - one))
            + th[0] * (th[0] - HBAR) / t;
        assert_close(dp[0], expect, 1e-12, "dp");
    }

    #[test]
    fn p6_closed_forms() {
        let th = [c(0.24, -0.13), c(0.35, 0.19), c(-0.27, 0.08), c(0.16, 0.31)];
        let t = c(1.6, 0.7);
        let (q, p) = (c(2.1, 0.9), c(-0.4, 0.3));
        let preset = painleve_preset(PresetId::P6, &th, t, &[q], &[p], HBAR).unwrap();
        let co = solve_coefficients(&preset.config, &preset.state, &preset.directions[0])
            .unwrap();
        let one = c(1.0, 0.0);
        let mu = q * (q - one) * (q - t) / (t * (t - one));
        assert_close(co.mu[0], mu, 1e-12, "mu");
        assert_close(co.nu_inf_0, mu / q, 1e-12, "nu 0");
        assert_close(co.nu_inf_m1, mu / (q * (q - one)), 1e-12, "nu -1");
        let (dq, dp) = field(&preset, 0);
        assert_close(
            dq[0],
            c(2.0, 0.0) * mu * p + HBAR * q * (q - one) / (t * (t - one)),
            1e-12,
            "dq",
        );
        let expect = -(c(3.0, 0.0) * q * q - c(2.0, 0.0) * t * q - c(2.0, 0.0) * q + t)
            * p
            * p
            / (t * (t - one))
            - HBAR * (c(2.0, 0.0) * q - one) * p / (t * (t - one))
            - th[1] * th[1] / ((t - one) * q * q)
            + th[2] * th[2] / (t * (q - one) * (q - one))
            - th[3] * th[3] / ((q - t) * (q - t))
            + th[0] * (th[0] - HBAR) / (t * (t - one));
        assert_close(dp[0], expect, 1e-12, "dp");
    }

    #[test]
    fn hierarchy_closed_forms_and_flows() {
        let theta = c(0.23, -0.17);
        let tau2 = c(0.4, 0.25);
        let tau1 = c(0.8, -0.35);
        let (q1, q2) = (c(1.4, 0.6), c(-0.9, 1.1));
        let (p1, p2) = (c(0.3, -0.5), c(-0.7, 0.2));
        let preset = painleve_preset(
            PresetId::P2h2,
            &[theta, tau2],
            tau1,
            &[q1, q2],
            &[p1, p2],
            HBAR,
        )
        .unwrap();
        let co1 = solve_coefficients(&preset.config, &preset.state, &preset.directions[0])
            .unwrap();
        let co2 = solve_coefficients(&preset.config, &preset.state, &preset.directions[1])
            .unwrap();
        assert_close(co1.nu_inf_pos[0], c(0.0, 0.0), 1e-12, "flow-1 nu 1");
        assert_close(co1.nu_inf_pos[1], c(0.5, 0.0), 1e-12, "flow-1 nu 2");
        assert_close(co2.nu_inf_pos[0], c(0.25, 0.0), 1e-12, "flow-2 nu 1");
        assert_close(co2.nu_inf_pos[1], c(0.0, 0.0), 1e-12, "flow-2 nu 2");
        let d = q1 - q2;
        assert_close(co1.mu[0], c(0.5, 0.0) / d, 1e-12, "flow-1 mu 1");
        assert_close(co1.mu[1], -c(0.5, 0.0) / d, 1e-12, "flow-1 mu 2");
        assert_close(co2.mu[0], -q2 / (c(4.0, 0.0) * d), 1e-12, "flow-2 mu 1");
        assert_close(co2.mu[1], q1 / (c(4.0, 0.0) * d), 1e-12, "flow-2 mu 2");

        let (dq, dp) = field(&preset, 0);
        assert_close(dq[0], p1 / d, 1e-12, "flow-1 dq1");
        assert_close(dq[1], -p2 / d, 1e-12, "flow-1 dq2");
        let half = c(0.5, 0.0);
        let expect_p1 = (p1 * p1 - p2 * p2) / (c(2.0, 0.0) * d * d)
            + half
                * (c(5.0, 0.0) * q1.powi(4)
                    + c(4.0, 0.0) * q1.powi(3) * q2
                    + c(3.0, 0.0) * q1 * q1 * q2 * q2
                    + c(2.0, 0.0) * q1 * q2.powi(3)
                    + q2.powi(4))
            + (q1 + half * q2) * tau1
            + half * (c(3.0, 0.0) * q1 * q1 + c(2.0, 0.0) * q1 * q2 + q2 * q2) * tau2
            + tau2 * tau2 / c(8.0, 0.0)
            + theta
            - half * HBAR;
        assert_close(dp[0], expect_p1, 1e-12, "flow-1 dp1");

        let (dq, dp) = field(&preset, 1);
        let quarter = c(0.25, 0.0);
        assert_close(
            dq[0],
            -half * p1 * q2 / d - quarter * HBAR / d,
            1e-12,
            "flow-2 dq1",
        );
        assert_close(dq[1], half * p2 * q1 / d + quarter * HBAR / d, 1e-12, "flow-2 dq2");
        let expect_p2 = q1 * (p1 * p1 - p2 * p2) / (c(4.0, 0.0) * d * d)
            + HBAR * (p1 - p2) / (c(4.0, 0.0) * d * d)
            - quarter
                * q1
                * (c(5.0, 0.0) * q2.powi(4)
                    + c(4.0, 0.0) * q2.powi(3) * q1
                    + c(3.0, 0.0) * q2 * q2 * q1 * q1
                    + c(2.0, 0.0) * q2 * q1.powi(3)
                    + q1.powi(4))
            - quarter * q1 * (c(2.0, 0.0) * q2 + q1) * tau1
            - quarter * q1 * (c(3.0, 0.0) * q2 * q2 + c(2.0, 0.0) * q2 * q1 + q1 * q1) * tau2
            - q1 * tau2 * tau2 / c(16.0, 0.0)
            - quarter * q1 * (c(2.0, 0.0) * theta - HBAR);
        assert_close(dp[1], expect_p2, 1e-12, "flow-2 dp2");
    }

    /// Change of variables under which both hierarchy flows become polynomial:
    /// push the computed fields through the exact differential of the map and
    /// compare with the displayed polynomial systems.
    #[test]
    fn hierarchy_polynomial_variables() {
        let theta = c(0.23, -0.17);
        let tau2 = c(0.4, 0.25);
        let tau1 = c(0.8, -0.35);
        let (q1, q2) = (c(1.4, 0.6), c(-0.9, 1.1));
        let (p1, p2) = (c(0.3, -0.5), c(-0.7, 0.2));
        let preset = painleve_preset(
            PresetId::P2h2,
            &[theta, tau2],
            tau1,
            &[q1, q2],
            &[p1, p2],
            HBAR,
        )
        .unwrap();
        let d = q1 - q2;
        let half = c(0.5, 0.0);
        let quarter = c(0.25, 0.0);

        // The symplectic change of variables (the (q1q2) coefficient of P2 and
        // the momentum combination in P1 are forced by {Q_i, P_j} = δ_ij).
        let big_q1 = -(q1 + q2);
        let big_q2 = q1 * q2 - quarter * tau2;
        let big_p1 = -(p1 * q1 - p2 * q2) / d
            + q1.powi(3)
            + q1 * q1 * q2
            + q1 * q2 * q2
            + q2.powi(3)
            + half * (q1 + q2) * tau2
            + half * tau1;
        let big_p2 = -(p1 - p2) / d + q1 * q1 + q1 * q2 + q2 * q2 + half * tau2;

        // exact differential of the map applied to a field (dq, dp, dτ1, dτ2)
        let push = |dq: &[C], dp: &[C], dt1: C, dt2: C| -> [C; 4] {
            let d_q1 = -(dq[0] + dq[1]);
            let d_q2 = q2 * dq[0] + q1 * dq[1] - quarter * dt2;
            let d_p1 = -(dp[0] * q1 + p1 * dq[0] - dp[1] * q2 - p2 * dq[1]) / d
                + (p1 * q1 - p2 * q2) * (dq[0] - dq[1]) / (d * d)
                + (c(3.0, 0.0) * q1 * q1 + c(2.0, 0.0) * q1 * q2 + q2 * q2) * dq[0]
                + (q1 * q1 + c(2.0, 0.0) * q1 * q2 + c(3.0, 0.0) * q2 * q2) * dq[1]
                + half * (dq[0] + dq[1]) * tau2
                + half * (q1 + q2) * dt2
                + half * dt1;
            let d_p2 = -(dp[0] - dp[1]) / d + (p1 - p2) * (dq[0] - dq[1]) / (d * d)
                + (c(2.0, 0.0) * q1 + q2) * dq[0]
                + (q1 + c(2.0, 0.0) * q2) * dq[1]
                + half * dt2;
            [d_q1, d_q2, d_p1, d_p2]
        };

        // first flow
        let (dq, dp) = field(&preset, 0);
        let got = push(&dq, &dp, HBAR, c(0.0, 0.0));
        let expect = [
            big_p2 - big_q1 * big_q1 + big_q2 - quarter * tau2,
            big_p2 * big_q1 - big_q1 * big_q2 + big_p1 - quarter * tau2 * big_q1
                - half * tau1,
            -half * big_p2 * big_p2
                + big_q2 * big_p2
                + c(2.0, 0.0) * big_p1 * big_q1
                + quarter * tau2 * big_p2
                - theta
                + HBAR,
            big_p2 * big_q1 - big_p1,
        ];
        for i in 0..4 {
            assert_close(got[i], expect[i], 1e-11, &format!("flow-1 polynomial {i}"));
        }

        // second flow
        let (dq, dp) = field(&preset, 1);
        let got = push(&dq, &dp, c(0.0, 0.0), HBAR);
        let eighth = c(0.125, 0.0);
        let expect = [
            half * big_p2 * big_q1 - half * big_q1 * big_q2 - eighth * tau2 * big_q1
                + half * big_p1
                - quarter * tau1,
            half * big_q1 * big_q1 * big_p2 - half * big_q2 * big_p2 + half * big_p1 * big_q1
                - half * big_q2 * big_q2
                - eighth * tau2 * big_p2
                - quarter * tau1 * big_q1
                + tau2 * tau2 / c(32.0, 0.0),
            -half * big_p2 * big_p2 * big_q1 - half * big_p1 * big_p2
                + half * big_q2 * big_p1
                + eighth * tau2 * big_p1
                + quarter * tau1 * big_p2,
            quarter * big_p2 * big_p2 + big_p2 * big_q2 + half * big_p1 * big_q1
                - half * (theta - HBAR),
        ];
        for i in 0..4 {
            assert_close(got[i], expect[i], 1e-11, &format!("flow-2 polynomial {i}"));
        }
    }

    #[test]
    fn fuchsian_matches_the_simple_pole_example_at_three_poles() {
        let th = [c(0.35, 0.19), c(-0.27, 0.08), c(0.16, 0.31)];
        let theta_inf = c(0.24, -0.13);
        let t = c(1.6, 0.7);
        let (cfg, dirs) = fuchsian_preset(theta_inf, &th, &[t], HBAR).unwrap();
        assert_eq!(dirs.len(), 1);
        let params = [theta_inf, th[0], th[1], th[2]];
        let (q, p) = (c(2.1, 0.9), c(-0.4, 0.3));
        let preset = painleve_preset(PresetId::P6, &params, t, &[q], &[p], HBAR).unwrap();
        assert_eq!(cfg, preset.config);
        let state = DarbouxState { q: vec![q], p: vec![p] };
        let co_f = solve_coefficients(&cfg, &state, &dirs[0]).unwrap();
        let co_p =
            solve_coefficients(&preset.config, &preset.state, &preset.directions[0]).unwrap();
        assert_close(co_f.mu[0], co_p.mu[0], 1e-13, "mu");
    }

    #[test]
    fn fuchsian_four_poles_is_a_valid_genus_two_system() {
        let th = [c(0.3, 0.1), c(-0.2, 0.25), c(0.15, -0.3), c(0.4, 0.2)];
        let (cfg, dirs) =
            fuchsian_preset(c(0.1, -0.2), &th, &[c(2.0, 0.5), c(-1.0, 1.5)], HBAR).unwrap();
        assert_eq!(cfg.genus(), 2);
        assert_eq!(dirs.len(), 2);
        assert!(cfg.validate(&crate::Tolerances::default()).ok);
        ensure_canonical(&cfg).unwrap();
        let state = DarbouxState {
            q: vec![c(0.5, 1.2), c(-0.7, -0.9)],
            p: vec![c(0.3, -0.4), c(0.6, 0.2)],
        };
        // the two movable-pole Hamiltonians come out of a 4x4 linear system;
        // check they match the order-1 residue coefficients
        let red = crate::reduction::reduced_hamiltonians(&cfg, &state).unwrap();
        let h = solve_isospectral_h(&cfg, &state).unwrap();
        for s in 0..4 {
            assert_close(red.ham_pos[s], h.h_x[s][0], 1e-13, "position Hamiltonian");
        }
        // duplicate positions are rejected
        assert!(fuchsian_preset(c(0.1, 0.0), &th, &[c(1.0, 0.0), c(2.0, 0.0)], HBAR).is_err());
    }

    /// Fourth-order central-difference estimates of ħq̇ and ħ²q̈ from five
    /// equispaced trajectory points (node 1, centered at the third point).
    fn central_derivatives(w: &[crate::flow::TrajectoryPoint], step: f64) -> (C, C) {
        let h = c(step, 0.0);
        let q: Vec<C> = w.iter().map(|pt| pt.q[0]).collect();
        let hdq = HBAR * (q[0] - c(8.0, 0.0) * q[1] + c(8.0, 0.0) * q[3] - q[4])
            / (c(12.0, 0.0) * h);
        let hddq = HBAR
            * HBAR
            * (-q[0] + c(16.0, 0.0) * q[1] - c(30.0, 0.0) * q[2] + c(16.0, 0.0) * q[3] - q[4])
            / (c(12.0, 0.0) * h * h);
        (hdq, hddq)
    }

    #[test]
    fn integrated_p2_satisfies_the_scalar_oracle() {
        let theta = c(0.37, -0.21);
        let t0 = c(0.9, 0.0);
        let preset =
            painleve_preset(PresetId::P2, &[theta], t0, &[c(1.1, 0.3)], &[c(-0.4, 0.5)], HBAR)
                .unwrap();
        let step = 1e-3;
        let traj = integrate_flow(
            &preset.config,
            &preset.state,
            &preset.directions[0],
            (0.0, 0.5),
            StepControl::FixedRk4 { step },
            1e-8,
        )
        .unwrap();
        assert!(traj.collision.is_none());
        let pts = &traj.points;
        assert!(pts.len() > 400);
        let mut checked = 0;
        for w in pts.windows(5).step_by(25) {
            let t = t0 + w[2].tau;
            let (hdq, hddq) = central_derivatives(w, step);
            let rhs =
                painleve_rhs_oracle(PresetId::P2, w[2].q[0], hdq, t, &[theta], HBAR).unwrap();
            assert_close(hddq, rhs, 1e-6, "second-order residual");
            checked += 1;
        }
        assert!(checked > 10);
    }

    #[test]
    fn integrated_p6_satisfies_the_scalar_oracle() {
        let th = [c(0.24, -0.13), c(0.35, 0.19), c(-0.27, 0.08), c(0.16, 0.31)];
        let t0 = c(1.6, 0.7);
        let preset =
            painleve_preset(PresetId::P6, &th, t0, &[c(2.1, 0.9)], &[c(-0.4, 0.3)], HBAR)
                .unwrap();
        let step = 1e-3;
        let traj = integrate_flow(
            &preset.config,
            &preset.state,
            &preset.directions[0],
            (0.0, 0.5),
            StepControl::FixedRk4 { step },
            1e-8,
        )
        .unwrap();
        assert!(traj.collision.is_none());
        let mut checked = 0;
        for w in traj.points.windows(5).step_by(25) {
            let t = t0 + w[2].tau;
            let (hdq, hddq) = central_derivatives(w, step);
            let rhs = painleve_rhs_oracle(PresetId::P6, w[2].q[0], hdq, t, &th, HBAR).unwrap();
            assert_close(hddq, rhs, 1e-6, "second-order residual");
            checked += 1;
        }
        assert!(checked > 10);
    }

    #[test]
    fn oracle_rejects_fixed_singular_points() {
        assert!(painleve_rhs_oracle(
            PresetId::P6,
            c(1.0, 0.0),
            c(0.0, 0.0),
            c(2.0, 0.0),
            &[c(0.1, 0.0); 4],
            HBAR
        )
        .is_err());
        assert!(painleve_rhs_oracle(
            PresetId::P3,
            c(0.0, 0.0),
            c(0.0, 0.0),
            c(1.0, 0.0),
            &[c(0.1, 0.0); 2],
            HBAR
        )
        .is_err());
    }
}
