//! Continuous quantum Otto engine on a periodic Ising ring.
//!
//! The field `h(t)` ramps between `h_c` and `h_h`; two bump functions
//! `λ_h`, `λ_c` switch the hot and cold baths on around the isochores. Each
//! spin couples to the baths through `σˣ`, whose eigenoperator decomposition
//! gives three jump channels per site with Bohr frequencies `2h + 4J`,
//! `2h`, `2h − 4J`.

use std::f64::consts::PI;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::generator::{GKLSGenerator, JumpTerm, TimeDependent};
use crate::operator::{embed_site, wrap_site, ComplexMatrix};
use crate::{Error, Result};

/// Shape of the field ramps between the isochores.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Ramp {
    #[default]
    Bump,
    Linear,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Boundary {
    #[default]
    Periodic,
}

/// Physical and schedule parameters of the engine.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OttoCycleConfig {
    /// Number of spins.
    pub n: usize,
    /// Ising coupling.
    pub j: f64,
    pub h_c: f64,
    pub h_h: f64,
    pub t1: f64,
    pub t2: f64,
    pub t3: f64,
    /// End of the cycle, which is also the period.
    pub t4: f64,
    /// Width of the bath switching.
    pub delta: f64,
    pub t_h: f64,
    pub t_c: f64,
    pub kappa_h: f64,
    pub kappa_c: f64,
    /// Cutoff frequency of the Ohmic spectral density (both baths).
    pub w_cut: f64,
    pub boundary: Boundary,
    pub ramp: Ramp,
}

impl Default for OttoCycleConfig {
    fn default() -> Self {
        Self {
            n: 2,
            j: 1.0,
            h_c: 1.0,
            h_h: 3.0,
            t1: 1.0,
            t2: 2.0,
            t3: 3.0,
            t4: 4.0,
            delta: 0.1,
            t_h: 4.0,
            t_c: 0.5,
            kappa_h: 0.1,
            kappa_c: 0.1,
            w_cut: 20.0,
            boundary: Boundary::Periodic,
            ramp: Ramp::Bump,
        }
    }
}

/// A broken configuration invariant.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Violation {
    pub code: &'static str,
    pub message: String,
}

impl OttoCycleConfig {
    pub fn period(&self) -> f64 {
        self.t4
    }

    /// Every broken invariant, empty when the configuration is usable.
    pub fn validate(&self) -> Vec<Violation> {
        let mut v = Vec::new();
        let mut push = |code, message: String| v.push(Violation { code, message });
        let reals = [
            self.j,
            self.h_c,
            self.h_h,
            self.t1,
            self.t2,
            self.t3,
            self.t4,
            self.delta,
            self.t_h,
            self.t_c,
            self.kappa_h,
            self.kappa_c,
            self.w_cut,
        ];
        if reals.iter().any(|x| !x.is_finite()) {
            push("otto.non_finite", "every parameter must be finite".into());
            return v;
        }
        if self.n < 2 {
            push(
                "otto.spin_count",
                format!("n = {} but at least 2 spins are needed", self.n),
            );
        }
        if !(self.h_h > self.h_c) {
            push(
                "otto.field_order",
                format!("h_h = {} must exceed h_c = {}", self.h_h, self.h_c),
            );
        }
        if !(0.0 < self.t1 && self.t1 < self.t2 && self.t2 < self.t3 && self.t3 < self.t4) {
            push(
                "otto.stroke_order",
                format!(
                    "need 0 < t1 < t2 < t3 < t4, got {}, {}, {}, {}",
                    self.t1, self.t2, self.t3, self.t4
                ),
            );
        }
        if !(self.delta > 0.0) {
            push(
                "otto.delta_positive",
                format!("delta = {} must be positive", self.delta),
            );
        } else if !(self.t1 - self.delta > 0.0
            && self.t2 + self.delta < self.t3 - self.delta
            && self.t4 + self.delta <= self.t1 + self.t4 - self.delta)
        {
            push(
                "otto.window_overlap",
                format!("bath windows of half-width {} overlap or leave the cycle", self.delta),
            );
        }
        if !(self.t_h > 0.0 && self.t_c > 0.0) {
            push(
                "otto.temperature_positive",
                format!(
                    "temperatures must be positive, got t_h = {}, t_c = {}",
                    self.t_h, self.t_c
                ),
            );
        }
        if !(self.kappa_h > 0.0 && self.kappa_c > 0.0) {
            push("otto.kappa_positive", "bath couplings must be positive".into());
        }
        if !(self.w_cut > 0.0) {
            push(
                "otto.cutoff_positive",
                format!("w_cut = {} must be positive", self.w_cut),
            );
        }
        v
    }

    /// `Err(InvalidConfig)` listing the violated codes.
    pub fn check(&self) -> Result<()> {
        let v = self.validate();
        if v.is_empty() {
            return Ok(());
        }
        let msg = v
            .iter()
            .map(|x| format!("{}: {}", x.code, x.message))
            .collect::<Vec<_>>()
            .join("; ");
        Err(Error::InvalidConfig(msg))
    }
}

/// `φ(t) = e^{−1/t}` for `t > 0`, zero otherwise.
pub fn bump_phi(t: f64) -> f64 {
    if t > 0.0 {
        (-1.0 / t).exp()
    } else {
        0.0
    }
}

/// Smooth step from 0 (`t ≤ 0`) to 1 (`t ≥ 1`).
pub fn bump_g(t: f64) -> f64 {
    if t <= 0.0 {
        return 0.0;
    }
    if t >= 1.0 {
        return 1.0;
    }
    let a = bump_phi(t);
    a / (a + bump_phi(1.0 - t))
}

/// `g'(t)`.
pub fn bump_g_derivative(t: f64) -> f64 {
    if t <= 0.0 || t >= 1.0 {
        return 0.0;
    }
    let (a, b) = (bump_phi(t), bump_phi(1.0 - t));
    let (da, db) = (a / (t * t), b / ((1.0 - t) * (1.0 - t)));
    let s = a + b;
    (da * b + a * db) / (s * s)
}

/// Field and bath switches at one time.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScheduleSample {
    pub h: f64,
    pub lambda_h: f64,
    pub lambda_c: f64,
}

fn ramp_value(ramp: Ramp, x: f64) -> f64 {
    match ramp {
        Ramp::Bump => bump_g(x),
        Ramp::Linear => x.clamp(0.0, 1.0),
    }
}

fn ramp_slope(ramp: Ramp, x: f64) -> f64 {
    match ramp {
        Ramp::Bump => bump_g_derivative(x),
        Ramp::Linear if (0.0..1.0).contains(&x) => 1.0,
        Ramp::Linear => 0.0,
    }
}

fn window(t: f64, start: f64, end: f64, delta: f64) -> f64 {
    bump_g((t - start + delta) / delta) * bump_g((end + delta - t) / delta)
}

fn schedule_unchecked(c: &OttoCycleConfig, t: f64) -> ScheduleSample {
    let period = c.t4;
    let tau = t.rem_euclid(period);
    let dh = c.h_h - c.h_c;
    let h = if tau <= c.t1 {
        c.h_c + dh * ramp_value(c.ramp, tau / c.t1)
    } else if tau <= c.t2 {
        c.h_h
    } else if tau <= c.t3 {
        c.h_c + dh * ramp_value(c.ramp, (c.t3 - tau) / (c.t3 - c.t2))
    } else {
        c.h_c
    };
    ScheduleSample {
        h,
        lambda_h: window(tau, c.t1, c.t2, c.delta),
        // the cold window runs past the period end into the next cycle
        lambda_c: window(tau, c.t3, c.t4, c.delta) + window(tau + period, c.t3, c.t4, c.delta),
    }
}

fn field_derivative_unchecked(c: &OttoCycleConfig, t: f64) -> f64 {
    let tau = t.rem_euclid(c.t4);
    let dh = c.h_h - c.h_c;
    if tau < c.t1 {
        dh * ramp_slope(c.ramp, tau / c.t1) / c.t1
    } else if c.t2 < tau && tau < c.t3 {
        -dh * ramp_slope(c.ramp, (c.t3 - tau) / (c.t3 - c.t2)) / (c.t3 - c.t2)
    } else {
        0.0
    }
}

/// `h(t)`, `λ_h(t)`, `λ_c(t)` with `t` reduced modulo the period.
pub fn schedule(config: &OttoCycleConfig, t: f64) -> Result<ScheduleSample> {
    config.check()?;
    if !(t >= 0.0) {
        return Err(Error::InvalidArgument(format!("t = {t} must be non-negative")));
    }
    Ok(schedule_unchecked(config, t))
}

/// `dh/dt`.
pub fn field_derivative(config: &OttoCycleConfig, t: f64) -> Result<f64> {
    config.check()?;
    Ok(field_derivative_unchecked(config, t))
}

// σ_z eigenvalue of `site` (1-based) in computational basis state `index`;
// bit 0 of each site is |+1⟩
fn spin(index: usize, site: usize, n: usize) -> f64 {
    if (index >> (n - site)) & 1 == 0 {
        1.0
    } else {
        -1.0
    }
}

fn coupling_diagonal(n: usize) -> Vec<f64> {
    (0..1usize << n)
        .map(|k| {
            -(1..=n)
                .map(|s| spin(k, s, n) * spin(k, wrap_site(s as i64 + 1, n), n))
                .sum::<f64>()
        })
        .collect()
}

fn magnetization_diagonal(n: usize) -> Vec<f64> {
    (0..1usize << n)
        .map(|k| -(1..=n).map(|s| spin(k, s, n)).sum::<f64>())
        .collect()
}

/// `H = −J Σ σᶻ_j σᶻ_{j+1} − h Σ σᶻ_j` on a ring of `n` spins.
pub fn ising_hamiltonian(n: usize, j: f64, h: f64) -> Result<ComplexMatrix> {
    if n < 2 {
        return Err(Error::InvalidArgument(format!("need at least 2 spins, got {n}")));
    }
    let zz = coupling_diagonal(n);
    let mz = magnetization_diagonal(n);
    let diag: Vec<f64> = zz.iter().zip(&mz).map(|(a, b)| j * a + h * b).collect();
    Ok(ComplexMatrix::from_real_diagonal(&diag))
}

/// `(2h + 4J, 2h, 2h − 4J)`.
pub fn bohr_frequencies(h: f64, j: f64) -> [f64; 3] {
    [2.0 * h + 4.0 * j, 2.0 * h, 2.0 * h - 4.0 * j]
}

/// One `L_{j,α}`.
#[derive(Debug, Clone, PartialEq)]
pub struct JumpOperator {
    /// 1-based site.
    pub site: usize,
    /// Channel 1, 2 or 3, matching the Bohr frequency index.
    pub channel: usize,
    pub operator: ComplexMatrix,
}

#[derive(Debug, Clone, PartialEq)]
pub struct JumpFamily {
    pub n: usize,
    pub operators: Vec<JumpOperator>,
}

impl JumpFamily {
    pub fn get(&self, site: usize, channel: usize) -> Option<&ComplexMatrix> {
        self.operators
            .iter()
            .find(|o| o.site == site && o.channel == channel)
            .map(|o| &o.operator)
    }

    /// Every operator followed by its adjoint.
    pub fn with_adjoints(&self) -> Vec<ComplexMatrix> {
        self.operators
            .iter()
            .flat_map(|o| [o.operator.clone(), o.operator.adjoint()])
            .collect()
    }
}

/// Projector–raising–projector operators on every site. With two spins both
/// neighbours are the same site, so the mixed channel vanishes.
pub fn jump_family(n: usize) -> Result<JumpFamily> {
    if n < 2 {
        return Err(Error::InvalidArgument(format!("need at least 2 spins, got {n}")));
    }
    let up = ComplexMatrix::ket_bra(2, 0, 0);
    let down = ComplexMatrix::ket_bra(2, 1, 1);
    let mut operators = Vec::with_capacity(3 * n);
    for site in 1..=n {
        let left = wrap_site(site as i64 - 1, n);
        let right = wrap_site(site as i64 + 1, n);
        let raise = embed_site(&ComplexMatrix::sigma_plus(), site, n)?;
        let pl = [embed_site(&up, left, n)?, embed_site(&down, left, n)?];
        let pr = [embed_site(&up, right, n)?, embed_site(&down, right, n)?];
        let sandwich = |a: &ComplexMatrix, b: &ComplexMatrix| &(a * &raise) * b;
        let l1 = sandwich(&pl[0], &pr[0]);
        let l2 = &sandwich(&pl[0], &pr[1]) + &sandwich(&pl[1], &pr[0]);
        let l3 = sandwich(&pl[1], &pr[1]);
        for (channel, operator) in [(1, l1), (2, l2), (3, l3)] {
            operators.push(JumpOperator {
                site,
                channel,
                operator,
            });
        }
    }
    Ok(JumpFamily { n, operators })
}

/// Bose occupation `1/(e^{ω/T} − 1)`.
pub fn bose_occupation(omega: f64, temperature: f64) -> f64 {
    1.0 / (omega / temperature).exp_m1()
}

fn thermal_rate_unchecked(omega: f64, temperature: f64, kappa: f64, w_cut: f64) -> f64 {
    let y = omega / temperature;
    let shape = if y == 0.0 { 1.0 } else { y / -(-y).exp_m1() };
    2.0 * PI * kappa * temperature * (-omega.abs() / w_cut).exp() * shape
}

/// Emission (`ω > 0`) or absorption (`ω < 0`) rate of an Ohmic bath
/// `J(w) = κ w e^{−w/w_cut}` at temperature `T`. At `ω = 0` the continuous
/// value `2πκT` is used.
pub fn thermal_rate(omega: f64, temperature: f64, kappa: f64, w_cut: f64) -> Result<f64> {
    if !(temperature > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "temperature {temperature} must be positive"
        )));
    }
    if !omega.is_finite() || !(kappa >= 0.0) || !(w_cut > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "bad rate parameters ω = {omega}, κ = {kappa}, w_cut = {w_cut}"
        )));
    }
    Ok(thermal_rate_unchecked(omega, temperature, kappa, w_cut))
}

/// The engine: configuration, generator and thermodynamic bookkeeping.
#[derive(Debug, Clone)]
pub struct OttoEngine {
    config: OttoCycleConfig,
    generator: GKLSGenerator,
    magnetization: ComplexMatrix,
}

impl OttoEngine {
    pub fn new(config: OttoCycleConfig) -> Result<Self> {
        let generator = build_otto_generator(&config)?;
        let magnetization = ComplexMatrix::from_real_diagonal(&magnetization_diagonal(config.n));
        Ok(Self {
            config,
            generator,
            magnetization,
        })
    }

    pub fn config(&self) -> &OttoCycleConfig {
        &self.config
    }

    pub fn generator(&self) -> &GKLSGenerator {
        &self.generator
    }

    pub fn period(&self) -> f64 {
        self.config.t4
    }

    pub fn schedule(&self, t: f64) -> ScheduleSample {
        schedule_unchecked(&self.config, t)
    }

    pub fn hamiltonian(&self, t: f64) -> ComplexMatrix {
        self.generator.hamiltonian_at(t)
    }

    /// `dH/dt = ḣ(t)·(−Σ σᶻ)`.
    pub fn hamiltonian_derivative(&self, t: f64) -> ComplexMatrix {
        self.magnetization
            .scale_real(field_derivative_unchecked(&self.config, t))
    }

    /// `tr(H ρ)`.
    pub fn energy(&self, rho: &ComplexMatrix, t: f64) -> f64 {
        (&self.hamiltonian(t) * rho).trace().re
    }

    /// `(Q̇_h, Q̇_c)` with `Q̇_r = tr(H(t)·λ_r(t) D_r(ρ))`.
    pub fn heat_current(&self, rho: &ComplexMatrix, t: f64) -> Result<(f64, f64)> {
        let h = self.hamiltonian(t);
        let q = |tag| -> Result<f64> { Ok((&h * &self.generator.dissipator(t, rho, Some(tag))?).trace().re) };
        Ok((q("hot")?, q("cold")?))
    }

    /// `Ẇ = tr(Ḣ ρ)`.
    pub fn work_rate(&self, rho: &ComplexMatrix, t: f64) -> f64 {
        (&self.hamiltonian_derivative(t) * rho).trace().re
    }

    /// Times in `[0, t_end]` where a linear ramp has a kink; none for bumps.
    pub fn breakpoints(&self, t_end: f64) -> Vec<f64> {
        if self.config.ramp == Ramp::Bump {
            return Vec::new();
        }
        let c = &self.config;
        let mut out = Vec::new();
        let mut base = 0.0;
        while base <= t_end {
            for s in [c.t1, c.t2, c.t3, c.t4] {
                if base + s <= t_end {
                    out.push(base + s);
                }
            }
            base += c.t4;
        }
        out
    }
}

/// Time-dependent generator of the engine. Channels are tagged `"hot"` or
/// `"cold"`; channels whose operator vanishes identically are omitted.
pub fn build_otto_generator(config: &OttoCycleConfig) -> Result<GKLSGenerator> {
    config.check()?;
    let cfg = Arc::new(config.clone());
    let n = config.n;
    let zz = coupling_diagonal(n);
    let mz = magnetization_diagonal(n);
    let hcfg = Arc::clone(&cfg);
    let hamiltonian = TimeDependent::function(move |t| {
        let h = schedule_unchecked(&hcfg, t).h;
        let diag: Vec<f64> = zz.iter().zip(&mz).map(|(a, b)| hcfg.j * a + h * b).collect();
        ComplexMatrix::from_real_diagonal(&diag)
    });

    let family = jump_family(n)?;
    let mut jumps = Vec::new();
    for hot in [true, false] {
        let tag = if hot { "hot" } else { "cold" };
        for op in family.operators.iter().filter(|o| o.operator.norm() > 0.0) {
            for sign in [1.0, -1.0] {
                let c = Arc::clone(&cfg);
                let alpha = op.channel - 1;
                let rate = move |t: f64| {
                    let s = schedule_unchecked(&c, t);
                    let (lambda, temp, kappa) = if hot {
                        (s.lambda_h, c.t_h, c.kappa_h)
                    } else {
                        (s.lambda_c, c.t_c, c.kappa_c)
                    };
                    if lambda == 0.0 {
                        return 0.0;
                    }
                    let omega = bohr_frequencies(s.h, c.j)[alpha];
                    lambda * thermal_rate_unchecked(sign * omega, temp, kappa, c.w_cut)
                };
                let operator = if sign > 0.0 {
                    op.operator.clone()
                } else {
                    op.operator.adjoint()
                };
                jumps.push(JumpTerm::with_rate_fn(operator, rate).tagged(tag));
            }
        }
    }
    Ok(GKLSGenerator::new(1 << n)
        .with_hamiltonian(hamiltonian)
        .with_jumps(jumps))
}
