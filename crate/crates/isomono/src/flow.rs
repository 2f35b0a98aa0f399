//! Hamiltonian value, evolution vector field of the Darboux coordinates, and
//! integration of the non-autonomous deformation flow.

use crate::deform::{solve_coefficients, DeformationCoefficients};
use crate::lax::{p1_at, p1_prime_at, p2_tilde_at, GenParams, IsospectralHamiltonians};
use crate::model::{ConnectionConfig, DarbouxState, DeformationVector};
use crate::scalar::{c, C};
use crate::{Error, Result};

/// The Hamiltonian generating the evolution field: the pairing of the ν
/// coefficients with the H coefficients, the c-polynomial evaluated on the
/// nodes, and the low-order corrections at infinity. The polynomial c-sum
/// starts at k = 1: the undetermined c_{∞,0} only shifts the Hamiltonian by a
/// state-independent constant when r_∞ ≥ 3 and must not contribute a
/// state-dependent term when r_∞ ≤ 2.
pub fn hamiltonian_value(
    cfg: &ConnectionConfig,
    state: &DarbouxState,
    coeffs: &DeformationCoefficients,
    h: &IsospectralHamiltonians,
) -> C {
    let g = cfg.genus();
    let r_inf = cfg.r_inf();
    let hbar = cfg.hbar;
    let mut ham = c(0.0, 0.0);

    // Σ_{k=0}^{r_∞−4} ν_{∞,k+1} H_{∞,k}
    for (k, &hk) in h.h_inf.iter().enumerate() {
        ham += coeffs.nu_inf_pos[k] * hk;
    }
    // −Σ_s Σ_{k=2}^{r_s} ν_{X_s,k−1} H_{X_s,k} + Σ_s α_{X_s} H_{X_s,1}
    for s in 0..cfg.n() {
        for k in 2..=cfg.r_s(s) {
            ham -= coeffs.nu_x[s][k - 1] * h.h_x[s][k - 1];
        }
        ham += -coeffs.nu_x0(s) * h.h_x[s][0]; // α_{X_s} = −ν_{X_s,0}
    }
    // −ħ Σ_j [Σ_{k≥1} c_{∞,k} q_j^k + Σ_s Σ_k c_{X_s,k}(q_j−X_s)^{−k}]
    for j in 0..g {
        let qj = state.q[j];
        let mut acc = c(0.0, 0.0);
        for k in 1..r_inf {
            acc += coeffs.c_inf[k] * qj.powi(k as i32);
        }
        for s in 0..cfg.n() {
            for (i, &cv) in coeffs.c_x[s].iter().enumerate() {
                acc += cv * (qj - cfg.x_s(s)).powi(-(i as i32) - 1);
            }
        }
        ham -= hbar * acc;
    }
    // low-order blocks at infinity
    let sum_h1: C = (0..cfg.n()).map(|s| h.h_x[s][0]).sum();
    let sum_xh: C = (0..cfg.n())
        .map(|s| {
            cfg.x_s(s) * h.h_x[s][0]
                + if cfg.r_s(s) >= 2 { h.h_x[s][1] } else { c(0.0, 0.0) }
        })
        .sum();
    let sum_p: C = state.p.iter().sum();
    let sum_qp: C = state.q.iter().zip(state.p.iter()).map(|(&q, &p)| q * p).sum();

    ham += coeffs.nu_inf_m1 * sum_xh + coeffs.nu_inf_0 * sum_h1;
    if r_inf <= 2 {
        ham -= (sum_h1 - hbar * sum_p) * coeffs.nu_inf_0;
    }
    if r_inf == 1 {
        ham -= (sum_xh - hbar * sum_qp) * coeffs.nu_inf_m1;
    }
    ham -= hbar * coeffs.nu_inf_0 * sum_p;
    ham -= hbar * coeffs.nu_inf_m1 * sum_qp;
    ham
}

/// Alternative closed form of the same Hamiltonian, written directly in terms
/// of μ and the node data; kept as an independent cross-check.
pub fn hamiltonian_value_alt(
    cfg: &ConnectionConfig,
    state: &DarbouxState,
    coeffs: &DeformationCoefficients,
) -> C {
    let g = cfg.genus();
    let r_inf = cfg.r_inf();
    let hbar = cfg.hbar;
    let gp = GenParams::new(cfg, state);
    let mut ham = c(0.0, 0.0);

    for i in 0..g {
        for j in 0..g {
            if i != j {
                ham -= c(0.5, 0.0) * hbar * (coeffs.mu[i] + coeffs.mu[j])
                    * (state.p[i] - state.p[j])
                    / (state.q[i] - state.q[j]);
            }
        }
    }
    for j in 0..g {
        let (qj, pj) = (state.q[j], state.p[j]);
        ham -= hbar * (coeffs.nu_inf_0 * pj + coeffs.nu_inf_m1 * qj * pj);
        let mut pole_sum = c(0.0, 0.0);
        for s in 0..cfg.n() {
            pole_sum += hbar * c(cfg.r_s(s) as f64, 0.0) / (qj - cfg.x_s(s));
        }
        ham += coeffs.mu[j] * pj * pole_sum;
        let mut bracket = pj * pj - p1_at(&gp, qj) * pj + p2_tilde_at(&gp, qj, false);
        if r_inf >= 3 {
            bracket += hbar * cfg.t_inf[0][r_inf - 1] * qj.powi(r_inf as i32 - 3);
        }
        ham += coeffs.mu[j] * bracket;
        let mut csum = c(0.0, 0.0);
        for k in 1..r_inf {
            csum += coeffs.c_inf[k] * qj.powi(k as i32);
        }
        for s in 0..cfg.n() {
            for (i, &cv) in coeffs.c_x[s].iter().enumerate() {
                csum += cv * (qj - cfg.x_s(s)).powi(-(i as i32) - 1);
            }
        }
        ham -= hbar * csum;
    }
    if r_inf == 2 {
        ham += (cfg.t_inf[0][1] * cfg.t_inf[1][0]
            + cfg.t_inf[1][1] * cfg.t_inf[0][0]
            + hbar * cfg.t_inf[0][1])
            * coeffs.nu_inf_0;
    }
    if r_inf == 1 {
        let mut corr = -cfg.t_inf[0][0] * (cfg.t_inf[1][0] + hbar);
        for s in 0..cfg.n() {
            if cfg.r_s(s) == 1 {
                corr += cfg.t_x[s][0][0] * cfg.t_x[s][1][0];
            }
        }
        ham -= corr * coeffs.nu_inf_m1;
    }
    ham
}

/// The evolution field (𝓛_α[q_j], 𝓛_α[p_j]) of the Darboux coordinates,
/// i.e. ħ·d/dτ along the deformation.
pub fn evolution_field(
    cfg: &ConnectionConfig,
    state: &DarbouxState,
    coeffs: &DeformationCoefficients,
    h: &IsospectralHamiltonians,
) -> (Vec<C>, Vec<C>) {
    let g = cfg.genus();
    let r_inf = cfg.r_inf();
    let hbar = cfg.hbar;
    let gp = GenParams::new(cfg, state);

    let mut dq = Vec::with_capacity(g);
    let mut dp = Vec::with_capacity(g);
    for j in 0..g {
        let (qj, pj) = (state.q[j], state.p[j]);
        let mut pole_sum1 = c(0.0, 0.0); // Σ ħ r_s/(q_j−X_s)
        let mut pole_sum2 = c(0.0, 0.0); // Σ ħ r_s/(q_j−X_s)²
        for s in 0..cfg.n() {
            let d = qj - cfg.x_s(s);
            pole_sum1 += hbar * c(cfg.r_s(s) as f64, 0.0) / d;
            pole_sum2 += hbar * c(cfg.r_s(s) as f64, 0.0) / (d * d);
        }

        let mut lq = c(2.0, 0.0)
            * coeffs.mu[j]
            * (pj - c(0.5, 0.0) * p1_at(&gp, qj) + c(0.5, 0.0) * pole_sum1)
            - hbar * coeffs.nu_inf_0
            - hbar * coeffs.nu_inf_m1 * qj;
        for i in 0..g {
            if i != j {
                lq -= hbar * (coeffs.mu[j] + coeffs.mu[i]) / (qj - state.q[i]);
            }
        }
        dq.push(lq);

        let mut lp = c(0.0, 0.0);
        for i in 0..g {
            if i != j {
                let d = qj - state.q[i];
                lp += hbar * (coeffs.mu[i] + coeffs.mu[j]) * (state.p[i] - pj) / (d * d);
            }
        }
        let mut inner = pj * p1_prime_at(&gp, qj) + pj * pole_sum2 - p2_tilde_at(&gp, qj, true);
        for (k, &hk) in h.h_inf.iter().enumerate().skip(1) {
            inner += c(k as f64, 0.0) * hk * qj.powi(k as i32 - 1);
        }
        for s in 0..cfg.n() {
            for k in 1..=cfg.r_s(s) {
                inner -= c(k as f64, 0.0) * h.h_x[s][k - 1]
                    * (qj - cfg.x_s(s)).powi(-(k as i32) - 1);
            }
        }
        if r_inf >= 4 {
            inner -= hbar
                * c((r_inf - 3) as f64, 0.0)
                * cfg.t_inf[0][r_inf - 1]
                * qj.powi(r_inf as i32 - 4);
        }
        lp += coeffs.mu[j] * inner;
        lp += hbar * coeffs.nu_inf_m1 * pj;
        for k in 1..r_inf {
            lp += hbar * c(k as f64, 0.0) * coeffs.c_inf[k] * qj.powi(k as i32 - 1);
        }
        for s in 0..cfg.n() {
            for (i, &cv) in coeffs.c_x[s].iter().enumerate() {
                let k = (i + 1) as f64;
                lp -= hbar * c(k, 0.0) * cv * (qj - cfg.x_s(s)).powi(-(i as i32) - 2);
            }
        }
        dp.push(lp);
    }
    (dq, dp)
}

// ---------------------------------------------------------------------------
// Flow integration
// ---------------------------------------------------------------------------

/// Step control for [`integrate_flow`].
#[derive(Debug, Clone, Copy)]
pub enum StepControl {
    /// Classic fourth-order Runge–Kutta with fixed step.
    FixedRk4 { step: f64 },
    /// Embedded Runge–Kutta–Fehlberg 4(5) with per-step error tolerance.
    AdaptiveRk45 { tol: f64, initial_step: f64 },
}

impl Default for StepControl {
    fn default() -> Self {
        StepControl::FixedRk4 { step: 1e-3 }
    }
}

/// One sample of an integrated trajectory.
#[derive(Debug, Clone)]
pub struct TrajectoryPoint {
    pub tau: C,
    pub q: Vec<C>,
    pub p: Vec<C>,
    pub ham: C,
}

/// Output of [`integrate_flow`]. When a node collision stops the flow early,
/// `collision` records where, and the points collected so far are kept.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub points: Vec<TrajectoryPoint>,
    pub final_config: ConnectionConfig,
    pub final_state: DarbouxState,
    pub collision: Option<String>,
}

/// Flattened ODE state: irregular times (k ≥ 1 only), pole positions, nodes.
pub(crate) fn pack(cfg: &ConnectionConfig, state: &DarbouxState) -> Vec<C> {
    let mut y = Vec::new();
    for i in 0..2 {
        y.extend(cfg.t_inf[i].iter().skip(1));
    }
    for s in 0..cfg.n() {
        for i in 0..2 {
            y.extend(cfg.t_x[s][i].iter().skip(1));
        }
        y.push(cfg.x_s(s));
    }
    y.extend(&state.q);
    y.extend(&state.p);
    y
}

pub(crate) fn unpack(template: &ConnectionConfig, y: &[C]) -> (ConnectionConfig, DarbouxState) {
    let mut cfg = template.clone();
    let mut it = y.iter().copied();
    for i in 0..2 {
        for t in cfg.t_inf[i].iter_mut().skip(1) {
            *t = it.next().unwrap();
        }
    }
    for s in 0..cfg.n() {
        for i in 0..2 {
            for t in cfg.t_x[s][i].iter_mut().skip(1) {
                *t = it.next().unwrap();
            }
        }
        cfg.structure.poles[s].x = it.next().unwrap();
    }
    let g = cfg.genus();
    let q: Vec<C> = (0..g).map(|_| it.next().unwrap()).collect();
    let p: Vec<C> = (0..g).map(|_| it.next().unwrap()).collect();
    debug_assert!(it.next().is_none());
    (cfg, DarbouxState { q, p })
}

/// d/dτ of the packed state: times advance by α, nodes by the evolution
/// field divided by ħ (the field is 𝓛_α = ħ d/dτ).
fn flow_rhs(
    template: &ConnectionConfig,
    alpha: &DeformationVector,
    y: &[C],
) -> Result<Vec<C>> {
    let (cfg, state) = unpack(template, y);
    let h = crate::lax::solve_isospectral_h(&cfg, &state)?;
    let coeffs = solve_coefficients(&cfg, &state, alpha)?;
    let (dq, dp) = evolution_field(&cfg, &state, &coeffs, &h);
    let mut dy = Vec::with_capacity(y.len());
    for i in 0..2 {
        dy.extend(alpha.a_inf[i].iter());
    }
    for s in 0..cfg.n() {
        for i in 0..2 {
            dy.extend(alpha.a_x[s][i].iter());
        }
        dy.push(alpha.a_pos[s]);
    }
    dy.extend(dq.iter().map(|v| v / cfg.hbar));
    dy.extend(dp.iter().map(|v| v / cfg.hbar));
    Ok(dy)
}

fn axpy(y: &[C], h: f64, k: &[C]) -> Vec<C> {
    y.iter().zip(k.iter()).map(|(&a, &b)| a + c(h, 0.0) * b).collect()
}

fn check_separation(cfg: &ConnectionConfig, state: &DarbouxState, tol_sep: f64) -> Option<String> {
    let g = cfg.genus();
    for i in 0..g {
        for j in (i + 1)..g {
            if (state.q[i] - state.q[j]).norm() < tol_sep {
                return Some(format!("nodes q_{} and q_{} within {tol_sep}", i + 1, j + 1));
            }
        }
        for s in 0..cfg.n() {
            if (state.q[i] - cfg.x_s(s)).norm() < tol_sep {
                return Some(format!("node q_{} within {tol_sep} of pole X_{}", i + 1, s + 1));
            }
        }
    }
    None
}

/// Integrate the deformation flow from τ = span.0 to τ = span.1 along the
/// constant deformation direction `alpha`. All trivial data (monodromies)
/// stays frozen; the H and deformation coefficients are rebuilt from the
/// current configuration at every stage evaluation.
pub fn integrate_flow(
    cfg: &ConnectionConfig,
    initial_state: &DarbouxState,
    alpha: &DeformationVector,
    span: (f64, f64),
    control: StepControl,
    tol_sep: f64,
) -> Result<Trajectory> {
    let mut y = pack(cfg, initial_state);
    let mut tau = span.0;
    let mut points = Vec::new();
    let mut collision = None;

    let record = |points: &mut Vec<TrajectoryPoint>, tau: f64, y: &[C]| -> Result<()> {
        let (cur_cfg, cur_state) = unpack(cfg, y);
        let h = crate::lax::solve_isospectral_h(&cur_cfg, &cur_state)?;
        let coeffs = solve_coefficients(&cur_cfg, &cur_state, alpha)?;
        let ham = hamiltonian_value(&cur_cfg, &cur_state, &coeffs, &h);
        points.push(TrajectoryPoint {
            tau: c(tau, 0.0),
            q: cur_state.q,
            p: cur_state.p,
            ham,
        });
        Ok(())
    };
    record(&mut points, tau, &y)?;

    match control {
        StepControl::FixedRk4 { step } => {
            let dir = if span.1 >= span.0 { 1.0 } else { -1.0 };
            let step = step.abs() * dir;
            while (span.1 - tau) * dir > 1e-15 {
                let h = if (span.1 - tau).abs() < step.abs() { span.1 - tau } else { step };
                let k1 = flow_rhs(cfg, alpha, &y)?;
                let k2 = flow_rhs(cfg, alpha, &axpy(&y, h / 2.0, &k1))?;
                let k3 = flow_rhs(cfg, alpha, &axpy(&y, h / 2.0, &k2))?;
                let k4 = flow_rhs(cfg, alpha, &axpy(&y, h, &k3))?;
                for i in 0..y.len() {
                    y[i] += c(h / 6.0, 0.0) * (k1[i] + c(2.0, 0.0) * (k2[i] + k3[i]) + k4[i]);
                }
                tau += h;
                let (cur_cfg, cur_state) = unpack(cfg, &y);
                if let Some(msg) = check_separation(&cur_cfg, &cur_state, tol_sep) {
                    collision = Some(format!("at tau = {tau}: {msg}"));
                    break;
                }
                record(&mut points, tau, &y)?;
            }
        }
        StepControl::AdaptiveRk45 { tol, initial_step } => {
            // Runge–Kutta–Fehlberg 4(5) coefficients
            const A: [[f64; 5]; 5] = [
                [1.0 / 4.0, 0.0, 0.0, 0.0, 0.0],
                [3.0 / 32.0, 9.0 / 32.0, 0.0, 0.0, 0.0],
                [1932.0 / 2197.0, -7200.0 / 2197.0, 7296.0 / 2197.0, 0.0, 0.0],
                [439.0 / 216.0, -8.0, 3680.0 / 513.0, -845.0 / 4104.0, 0.0],
                [-8.0 / 27.0, 2.0, -3544.0 / 2565.0, 1859.0 / 4104.0, -11.0 / 40.0],
            ];
            const B5: [f64; 6] =
                [16.0 / 135.0, 0.0, 6656.0 / 12825.0, 28561.0 / 56430.0, -9.0 / 50.0, 2.0 / 55.0];
            const B4: [f64; 6] =
                [25.0 / 216.0, 0.0, 1408.0 / 2565.0, 2197.0 / 4104.0, -1.0 / 5.0, 0.0];
            let dir = if span.1 >= span.0 { 1.0 } else { -1.0 };
            let mut h = initial_step.abs() * dir;
            while (span.1 - tau) * dir > 1e-15 {
                if (span.1 - tau).abs() < h.abs() {
                    h = span.1 - tau;
                }
                let mut k: Vec<Vec<C>> = Vec::with_capacity(6);
                k.push(flow_rhs(cfg, alpha, &y)?);
                for stage in 0..5 {
                    let mut ys = y.clone();
                    for (j, kj) in k.iter().enumerate() {
                        let w = h * A[stage][j];
                        for (yi, ki) in ys.iter_mut().zip(kj.iter()) {
                            *yi += c(w, 0.0) * ki;
                        }
                    }
                    k.push(flow_rhs(cfg, alpha, &ys)?);
                }
                let mut y5 = y.clone();
                let mut err: f64 = 0.0;
                for i in 0..y.len() {
                    let mut acc5 = c(0.0, 0.0);
                    let mut acc4 = c(0.0, 0.0);
                    for j in 0..6 {
                        acc5 += c(B5[j], 0.0) * k[j][i];
                        acc4 += c(B4[j], 0.0) * k[j][i];
                    }
                    y5[i] += c(h, 0.0) * acc5;
                    err = err.max(((acc5 - acc4) * c(h, 0.0)).norm());
                }
                if err <= tol || h.abs() < 1e-12 {
                    y = y5;
                    tau += h;
                    let (cur_cfg, cur_state) = unpack(cfg, &y);
                    if let Some(msg) = check_separation(&cur_cfg, &cur_state, tol_sep) {
                        collision = Some(format!("at tau = {tau}: {msg}"));
                        break;
                    }
                    record(&mut points, tau, &y)?;
                }
                // standard step-size update with safety factor
                let scale = if err > 0.0 { 0.9 * (tol / err).powf(0.2) } else { 2.0 };
                h *= scale.clamp(0.2, 5.0);
            }
        }
    }

    let (final_config, final_state) = unpack(cfg, &y);
    Ok(Trajectory { points, final_config, final_state, collision })
}

/// Integrate a flow whose deformation direction is recomputed from the
/// current configuration at every stage (needed for directions whose α
/// coefficients are built from the evolving irregular times, such as the
/// scaling and translation directions). Fixed-step fourth-order Runge–Kutta;
/// returns the final configuration and state.
pub fn integrate_flow_field<F>(
    cfg: &ConnectionConfig,
    initial_state: &DarbouxState,
    direction: F,
    span: (f64, f64),
    step: f64,
    tol_sep: f64,
) -> Result<(ConnectionConfig, DarbouxState)>
where
    F: Fn(&ConnectionConfig) -> DeformationVector,
{
    let rhs = |y: &[C]| -> Result<Vec<C>> {
        let (cur_cfg, _) = unpack(cfg, y);
        let alpha = direction(&cur_cfg);
        flow_rhs(cfg, &alpha, y)
    };
    let mut y = pack(cfg, initial_state);
    let mut tau = span.0;
    let dir = if span.1 >= span.0 { 1.0 } else { -1.0 };
    let step = step.abs() * dir;
    while (span.1 - tau) * dir > 1e-15 {
        let h = if (span.1 - tau).abs() < step.abs() { span.1 - tau } else { step };
        let k1 = rhs(&y)?;
        let k2 = rhs(&axpy(&y, h / 2.0, &k1))?;
        let k3 = rhs(&axpy(&y, h / 2.0, &k2))?;
        let k4 = rhs(&axpy(&y, h, &k3))?;
        for i in 0..y.len() {
            y[i] += c(h / 6.0, 0.0) * (k1[i] + c(2.0, 0.0) * (k2[i] + k3[i]) + k4[i]);
        }
        tau += h;
        let (cur_cfg, cur_state) = unpack(cfg, &y);
        if let Some(msg) = check_separation(&cur_cfg, &cur_state, tol_sep) {
            return Err(Error::NodeCollision { tau, detail: msg });
        }
    }
    let (final_cfg, final_state) = unpack(cfg, &y);
    Ok((final_cfg, final_state))
}

/// CSV export: header plus one row per sample, complex values split into
/// real/imaginary columns.
pub fn trajectory_to_csv(traj: &Trajectory) -> String {
    let g = traj.points.first().map_or(0, |pt| pt.q.len());
    let mut out = String::from("time_re,time_im");
    for j in 1..=g {
        out.push_str(&format!(",q{j}_re,q{j}_im"));
    }
    for j in 1..=g {
        out.push_str(&format!(",p{j}_re,p{j}_im"));
    }
    out.push_str(",ham_re,ham_im\n");
    for pt in &traj.points {
        out.push_str(&format!("{:.17e},{:.17e}", pt.tau.re, pt.tau.im));
        for v in pt.q.iter().chain(pt.p.iter()) {
            out.push_str(&format!(",{:.17e},{:.17e}", v.re, v.im));
        }
        out.push_str(&format!(",{:.17e},{:.17e}\n", pt.ham.re, pt.ham.im));
    }
    out
}
