//! Closed-form evaluators for the channel, computing and flight models.
//!
//! Every function here is pure. Times are seconds, frequencies cycles/s,
//! sizes bits, energies joules.

use crate::error::DomainError;
use crate::scenario::{Task, UavParams};

/// Latency and energy of one compute path.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ComputeOutcome {
    /// Time predicted by the twin from the estimated frequency.
    pub est_time: f64,
    /// Actual minus estimated time, caused by the frequency deviation.
    pub time_gap: f64,
    pub actual_time: f64,
    pub energy: f64,
    /// Bits forwarded to the RSU (UAV path only).
    pub relayed_bits: f64,
}

/// Gain and rate of one link.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkBudget {
    pub gain: f64,
    pub rate: f64,
}

fn distance_sq(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Free-space power gain `β0 / d²`.
pub fn channel_gain(a: &[f64; 3], b: &[f64; 3], ref_gain: f64) -> Result<f64, DomainError> {
    let d2 = distance_sq(a, b);
    if d2 == 0.0 {
        return Err(DomainError::ZeroDistance);
    }
    Ok(ref_gain / d2)
}

/// OFDMA uplink rate with the band split evenly over `num_users`.
pub fn uplink_rate(gain: f64, tx_power: f64, bandwidth: f64, num_users: usize, noise_psd: f64) -> f64 {
    let k = num_users as f64;
    let snr = k * tx_power * gain / (bandwidth * noise_psd);
    bandwidth / k * (1.0 + snr).log2()
}

pub fn link_budget(
    a: &[f64; 3],
    b: &[f64; 3],
    ref_gain: f64,
    tx_power: f64,
    bandwidth: f64,
    num_users: usize,
    noise_psd: f64,
) -> Result<LinkBudget, DomainError> {
    let gain = channel_gain(a, b, ref_gain)?;
    Ok(LinkBudget { gain, rate: uplink_rate(gain, tx_power, bandwidth, num_users, noise_psd) })
}

/// Estimated time and deviation gap for `cycles` of work.
///
/// `est_freq = 0` with pending work yields an infinite latency.
fn timed(cycles: f64, est_freq: f64, deviation: f64, what: &'static str) -> Result<(f64, f64), DomainError> {
    let actual = est_freq + deviation;
    if actual < 0.0 || actual.is_nan() {
        return Err(DomainError::Negative { what, value: actual });
    }
    if cycles == 0.0 {
        return Ok((0.0, 0.0));
    }
    if est_freq == 0.0 || actual == 0.0 {
        return Ok((f64::INFINITY, 0.0));
    }
    let est = cycles / est_freq;
    let gap = -cycles * deviation / (est_freq * actual);
    Ok((est, gap))
}

fn check_partition(alpha: f64) -> Result<(), DomainError> {
    if (0.0..=1.0).contains(&alpha) {
        Ok(())
    } else {
        Err(DomainError::Partition(alpha))
    }
}

/// Local share `(1 - α)` of the task on the vehicle CPU.
pub fn local_compute(alpha: f64, task: &Task, est_freq: f64, deviation: f64) -> Result<ComputeOutcome, DomainError> {
    check_partition(alpha)?;
    if !(est_freq > 0.0) {
        return Err(DomainError::NonPositive { what: "estimated local frequency", value: est_freq });
    }
    let actual = est_freq + deviation;
    if !(actual > 0.0) {
        return Err(DomainError::NonPositive { what: "actual local frequency", value: actual });
    }
    let (est_time, time_gap) = timed((1.0 - alpha) * task.cycles(), est_freq, deviation, "actual local frequency")?;
    Ok(ComputeOutcome { est_time, time_gap, actual_time: est_time + time_gap, energy: 0.0, relayed_bits: 0.0 })
}

pub fn offload_time(alpha: f64, task: &Task, rate: f64) -> f64 {
    alpha * task.bits / rate
}

pub fn relay_time(relayed_bits: f64, relay_rate: f64) -> f64 {
    relayed_bits / relay_rate
}

/// UAV processing of the offloaded share `α D`.
///
/// Energy is charged for the cycles that fit in `deadline - T^o`. The bits
/// not processed during the offloading window are relayed to the RSU; once
/// the upload alone exceeds the deadline everything is relayed.
pub fn uav_compute(
    alpha: f64,
    task: &Task,
    offload_time: f64,
    est_freq: f64,
    deviation: f64,
    kappa: f64,
) -> Result<ComputeOutcome, DomainError> {
    check_partition(alpha)?;
    if est_freq < 0.0 {
        return Err(DomainError::Negative { what: "estimated UAV frequency", value: est_freq });
    }
    let offloaded_bits = alpha * task.bits;
    let cycles = offloaded_bits * task.density;
    let (est_time, time_gap) = timed(cycles, est_freq, deviation, "actual UAV frequency")?;
    if cycles == 0.0 {
        return Ok(ComputeOutcome::default());
    }
    let freq = est_freq + deviation;
    let window = (task.deadline - offload_time).max(0.0);
    let energy = kappa * freq * freq * (freq * window).min(cycles);
    let relayed_bits = if offload_time >= task.deadline {
        offloaded_bits
    } else {
        (offloaded_bits - freq * offload_time / task.density).clamp(0.0, offloaded_bits)
    };
    Ok(ComputeOutcome { est_time, time_gap, actual_time: est_time + time_gap, energy, relayed_bits })
}

/// RSU processing of the relayed bits.
pub fn rsu_compute(
    relayed_bits: f64,
    task: &Task,
    relay_time: f64,
    est_freq: f64,
    deviation: f64,
    kappa: f64,
) -> Result<ComputeOutcome, DomainError> {
    if relayed_bits < 0.0 {
        return Err(DomainError::Negative { what: "relayed bits", value: relayed_bits });
    }
    if est_freq < 0.0 {
        return Err(DomainError::Negative { what: "estimated RSU frequency", value: est_freq });
    }
    let cycles = relayed_bits * task.density;
    let (est_time, time_gap) = timed(cycles, est_freq, deviation, "actual RSU frequency")?;
    if cycles == 0.0 {
        return Ok(ComputeOutcome::default());
    }
    let freq = est_freq + deviation;
    let window = (task.deadline - relay_time).max(0.0);
    let energy = kappa * freq * freq * (freq * window).min(cycles);
    Ok(ComputeOutcome { est_time, time_gap, actual_time: est_time + time_gap, energy, relayed_bits: 0.0 })
}

/// Offloading followed by the slower of the relay branch and the UAV branch.
pub fn edge_latency(offload: f64, relay: f64, rsu: f64, uav: f64) -> f64 {
    offload + (relay + rsu).max(uav)
}

pub fn norm2(v: [f64; 2]) -> f64 {
    v[0].hypot(v[1])
}

/// Scale `v` down so that its norm does not exceed `max`.
pub fn clamp_norm(v: [f64; 2], max: f64) -> [f64; 2] {
    let n = norm2(v);
    if n <= max {
        return v;
    }
    let s = max / n;
    let mut out = [v[0] * s, v[1] * s];
    // Rounding in the rescale can leave the norm an ulp above the cap.
    while norm2(out) > max {
        out = [out[0] * (1.0 - f64::EPSILON), out[1] * (1.0 - f64::EPSILON)];
    }
    out
}

/// Constant-acceleration step at fixed altitude.
///
/// Returns the new position and velocity. The requested acceleration is
/// saturated first; the new velocity is saturated after integration.
pub fn update_kinematics(
    position: [f64; 3],
    velocity: [f64; 2],
    accel: [f64; 2],
    dt: f64,
    max_speed: f64,
    max_accel: f64,
) -> ([f64; 3], [f64; 2]) {
    let a = clamp_norm(accel, max_accel);
    let next_pos = [
        position[0] + velocity[0] * dt + 0.5 * a[0] * dt * dt,
        position[1] + velocity[1] * dt + 0.5 * a[1] * dt * dt,
        position[2],
    ];
    let next_vel = clamp_norm([velocity[0] + a[0] * dt, velocity[1] + a[1] * dt], max_speed);
    (next_pos, next_vel)
}

/// The three terms of the rotary-wing flight power.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PropulsionPower {
    pub parasite: f64,
    pub profile: f64,
    pub induced: f64,
}

impl PropulsionPower {
    pub fn total(&self) -> f64 {
        self.parasite + self.profile + self.induced
    }
}

pub fn propulsion_power(speed: f64, uav: &UavParams) -> PropulsionPower {
    let parasite = 0.5 * uav.fuselage_drag_ratio * uav.air_density * uav.rotor_solidity * uav.rotor_disc_area * speed.powi(3);
    let profile =
        uav.blade_power * (1.0 + 3.0 * speed.powi(uav.profile_speed_exponent as i32) / (uav.tip_speed * uav.tip_speed));
    // sqrt(1 + x²) - x, written to avoid cancellation at high speed.
    let x = speed * speed / (2.0 * uav.mean_rotor_velocity * uav.mean_rotor_velocity);
    let induced = uav.induced_power / ((1.0 + x * x).sqrt() + x);
    PropulsionPower { parasite, profile, induced }
}

pub fn propulsion_energy(velocity: [f64; 2], dt: f64, uav: &UavParams) -> f64 {
    propulsion_power(norm2(velocity), uav).total() * dt
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn task(bits: f64, density: f64) -> Task {
        Task { bits, density, deadline: 1.0 }
    }

    #[test]
    fn gain_at_altitude() {
        let h = channel_gain(&[0.0, 0.0, 100.0], &[0.0, 0.0, 0.0], 1e-3).unwrap();
        assert_relative_eq!(h, 1e-7, max_relative = 1e-15);
    }

    #[test]
    fn gain_inverse_square() {
        let near = channel_gain(&[0.0, 0.0, 100.0], &[30.0, 40.0, 0.0], 1e-3).unwrap();
        let far = channel_gain(&[0.0, 0.0, 200.0], &[60.0, 80.0, 0.0], 1e-3).unwrap();
        assert_relative_eq!(near / far, 4.0, max_relative = 1e-14);
    }

    #[test]
    fn gain_rejects_coincident_points() {
        assert_eq!(channel_gain(&[1.0, 2.0, 3.0], &[1.0, 2.0, 3.0], 1e-3), Err(DomainError::ZeroDistance));
    }

    #[test]
    fn uplink_rate_reference_values() {
        // mpmath, 40 digits.
        let r = uplink_rate(1e-7, 0.5, 2e6, 12, 1e-16);
        assert_relative_eq!(r, 1_925_204.600_599_714_7, max_relative = 1e-12);
        let h = channel_gain(&[0.0, 0.0, 100.0], &[-50.0, 0.0, 0.0], 1e-3).unwrap();
        assert_relative_eq!(h, 8e-8, max_relative = 1e-15);
        let rr = uplink_rate(h, 0.8, 2e6, 12, 1e-16);
        assert_relative_eq!(rr, 1_984_544.374_755_177_5, max_relative = 1e-12);
    }

    #[test]
    fn uplink_rate_vanishes_without_signal() {
        assert_eq!(uplink_rate(0.0, 0.5, 2e6, 12, 1e-16), 0.0);
        assert!(uplink_rate(1e-30, 0.5, 2e6, 12, 1e-16) < 1e-6);
    }

    #[test]
    fn local_without_deviation() {
        let out = local_compute(0.0, &task(1e6, 1000.0), 1e9, 0.0).unwrap();
        assert_eq!((out.est_time, out.time_gap, out.actual_time), (1.0, 0.0, 1.0));
    }

    #[test]
    fn local_full_offload_is_free() {
        let out = local_compute(1.0, &task(1e6, 1000.0), 1e9, 1e8).unwrap();
        assert_eq!((out.est_time, out.time_gap, out.actual_time), (0.0, 0.0, 0.0));
    }

    #[test]
    fn local_with_positive_deviation() {
        let out = local_compute(0.0, &task(1e6, 1000.0), 1e9, 1e8).unwrap();
        assert_relative_eq!(out.actual_time, 1e9 / 1.1e9, max_relative = 1e-14);
        assert_relative_eq!(out.time_gap, 1e9 / 1.1e9 - 1.0, max_relative = 1e-13);
    }

    #[test]
    fn local_rejects_non_positive_frequency() {
        assert!(local_compute(0.5, &task(1e6, 1000.0), 1e9, -1e9).is_err());
        assert!(local_compute(0.5, &task(1e6, 1000.0), 0.0, 0.0).is_err());
        assert!(local_compute(1.5, &task(1e6, 1000.0), 1e9, 0.0).is_err());
    }

    #[test]
    fn offload_time_examples() {
        assert_eq!(offload_time(0.0, &task(1e6, 1000.0), 2e6), 0.0);
        assert_eq!(offload_time(1.0, &task(2e6, 1000.0), 2e6), 1.0);
        assert_relative_eq!(
            offload_time(0.5, &task(1e6, 1000.0), 1.925_204_600_599_714_7e6),
            0.259_712_655_914_205_95,
            max_relative = 1e-12
        );
    }

    #[test]
    fn uav_energy_example() {
        // 5e8 cycles at 2 GHz with 0.5 s left: the whole workload fits.
        let out = uav_compute(0.5, &task(1e6, 1000.0), 0.5, 2e9, 0.0, 1e-26).unwrap();
        assert_relative_eq!(out.energy, 20.0, max_relative = 1e-12);
        assert_relative_eq!(out.actual_time, 0.25, max_relative = 1e-15);
    }

    #[test]
    fn uav_no_offload() {
        let out = uav_compute(0.0, &task(1e6, 1000.0), 0.0, 2e9, 1e8, 1e-26).unwrap();
        assert_eq!(out, ComputeOutcome::default());
    }

    #[test]
    fn uav_relayed_bits_example() {
        let out = uav_compute(1.0, &task(1e6, 1000.0), 0.5, 1e9, 0.0, 1e-26).unwrap();
        assert_relative_eq!(out.relayed_bits, 5e5, max_relative = 1e-15);
    }

    #[test]
    fn uav_relays_everything_after_deadline() {
        let out = uav_compute(1.0, &task(1e6, 1000.0), 1.5, 1e9, 0.0, 1e-26).unwrap();
        assert_eq!(out.relayed_bits, 1e6);
        assert_eq!(out.energy, 0.0);
    }

    #[test]
    fn uav_zero_allocation_is_infinite_latency() {
        let out = uav_compute(0.5, &task(1e6, 1000.0), 0.2, 0.0, 0.0, 1e-26).unwrap();
        assert!(out.actual_time.is_infinite());
        assert_eq!(out.energy, 0.0);
        assert_eq!(out.relayed_bits, 5e5);
    }

    #[test]
    fn uav_rejects_negative_actual_frequency() {
        assert!(uav_compute(0.5, &task(1e6, 1000.0), 0.2, 1e9, -2e9, 1e-26).is_err());
    }

    #[test]
    fn rsu_examples() {
        assert_eq!(rsu_compute(0.0, &task(1e6, 1000.0), 0.0, 1e9, 0.0, 1e-26).unwrap(), ComputeOutcome::default());
        // f(t - T^r) = 7.5e8 exceeds the 5e8 relayed cycles.
        let out = rsu_compute(5e5, &task(1e6, 1000.0), 0.25, 1e9, 0.0, 1e-26).unwrap();
        assert_relative_eq!(out.energy, 5.0, max_relative = 1e-12);
        assert_eq!(out.actual_time, 5e5 * 1000.0 / 1e9);
        assert_eq!(out.time_gap, 0.0);
    }

    #[test]
    fn relay_time_examples() {
        assert_eq!(relay_time(0.0, 2e6), 0.0);
        assert_eq!(relay_time(2e6, 2e6), 1.0);
        assert_relative_eq!(
            relay_time(5e5, 1.984_544_374_755_177_5e6),
            0.251_946_999_200_601_04,
            max_relative = 1e-12
        );
    }

    #[test]
    fn edge_latency_examples() {
        assert_relative_eq!(edge_latency(0.26, 0.0, 0.0, 0.5), 0.76, max_relative = 1e-15);
        assert_eq!(edge_latency(0.0, 0.0, 0.0, 0.0), 0.0);
        assert_relative_eq!(edge_latency(0.2, 0.3, 0.4, 0.5), 0.9, max_relative = 1e-15);
    }

    #[test]
    fn kinematics_examples() {
        let (q, v) = update_kinematics([0.0, 0.0, 100.0], [10.0, 0.0], [2.0, 0.0], 1.0, 20.0, 5.0);
        assert_eq!(q, [11.0, 0.0, 100.0]);
        assert_eq!(v, [12.0, 0.0]);

        let (_, v) = update_kinematics([0.0, 0.0, 100.0], [20.0, 0.0], [2.0, 0.0], 1.0, 20.0, 5.0);
        assert_eq!(norm2(v), 20.0);

        // ‖(6, 8)‖ = 10 is halved to 5, so from rest the step moves ½·(3, 4).
        let (q, v) = update_kinematics([0.0, 0.0, 100.0], [0.0, 0.0], [6.0, 8.0], 1.0, 20.0, 5.0);
        assert_relative_eq!(norm2(v), 5.0, max_relative = 1e-15);
        assert_relative_eq!(v[1] / v[0], 8.0 / 6.0, max_relative = 1e-14);
        assert_relative_eq!(q[0], 1.5, max_relative = 1e-14);
        assert_relative_eq!(q[1], 2.0, max_relative = 1e-14);
    }

    #[test]
    fn hover_power() {
        let p = propulsion_power(0.0, &UavParams::default());
        assert_relative_eq!(p.total(), 128.10, max_relative = 1e-12);
        assert_relative_eq!(propulsion_energy([0.0, 0.0], 1.0, &UavParams::default()), 128.10, max_relative = 1e-12);
    }

    #[test]
    fn cruise_power_terms() {
        // mpmath evaluation of the three terms at 20 m/s.
        let p = propulsion_power(20.0, &UavParams::default());
        assert_relative_eq!(p.parasite, 73.941, max_relative = 1e-12);
        assert_relative_eq!(p.profile, 132.702, max_relative = 1e-12);
        assert_relative_eq!(p.induced, 2.882_844_874_995_234_4, max_relative = 1e-12);
        assert_relative_eq!(p.total(), 209.525_844_874_995_23, max_relative = 1e-12);

        let quadratic = UavParams { profile_speed_exponent: 2, ..Default::default() };
        assert_relative_eq!(propulsion_power(20.0, &quadratic).profile, 43.7136, max_relative = 1e-12);
    }

    #[test]
    fn power_is_isotropic() {
        let u = UavParams::default();
        let e1 = propulsion_energy([12.0, 5.0], 1.0, &u);
        let e2 = propulsion_energy([-5.0, 12.0], 1.0, &u);
        let e3 = propulsion_energy([13.0, 0.0], 1.0, &u);
        assert_relative_eq!(e1, e2, max_relative = 1e-14);
        assert_relative_eq!(e1, e3, max_relative = 1e-14);
    }

    fn naive_power(v: f64, u: &UavParams) -> [f64; 3] {
        let parasite = 0.5 * u.fuselage_drag_ratio * u.air_density * u.rotor_solidity * u.rotor_disc_area * v * v * v;
        let profile = u.blade_power * (1.0 + 3.0 * v * v * v / (u.tip_speed * u.tip_speed));
        let v0 = u.mean_rotor_velocity;
        let induced = u.induced_power * ((1.0 + v.powi(4) / (4.0 * v0.powi(4))).sqrt() - v * v / (2.0 * v0 * v0));
        [parasite, profile, induced]
    }

    proptest! {
        #[test]
        fn power_terms_match_direct_form(v in 0.0f64..20.0) {
            let u = UavParams::default();
            let p = propulsion_power(v, &u);
            let [a, b, c] = naive_power(v, &u);
            prop_assert!((p.parasite - a).abs() <= 1e-12 * a.abs().max(1.0));
            prop_assert!((p.profile - b).abs() <= 1e-12 * b.abs());
            prop_assert!((p.induced - c).abs() <= 1e-9 * c.abs());
        }

        #[test]
        fn deviation_identity_all_paths(
            alpha in 0.0f64..=1.0,
            bits in 2e5f64..2e6,
            density in 500.0f64..1500.0,
            est in 1e8f64..2e10,
            ratio in -0.99f64..0.99,
        ) {
            let t = task(bits, density);
            let dev = ratio * est;
            let actual = est + dev;
            let l = local_compute(alpha, &t, est, dev).unwrap();
            let expect = (1.0 - alpha) * t.cycles() / actual;
            prop_assert!((l.est_time + l.time_gap - expect).abs() <= 1e-9 * expect.max(f64::MIN_POSITIVE));
            let u = uav_compute(alpha, &t, 0.1, est, dev, 1e-26).unwrap();
            let expect = alpha * t.cycles() / actual;
            prop_assert!((u.est_time + u.time_gap - expect).abs() <= 1e-9 * expect.max(f64::MIN_POSITIVE));
            let r = rsu_compute(alpha * bits, &t, 0.1, est, dev, 1e-26).unwrap();
            prop_assert!((r.est_time + r.time_gap - expect).abs() <= 1e-9 * expect.max(f64::MIN_POSITIVE));
        }

        #[test]
        fn deviation_sign(ratio in -0.5f64..0.5, alpha in 0.0f64..0.9) {
            let t = task(1e6, 1000.0);
            let gap = local_compute(alpha, &t, 1e9, ratio * 1e9).unwrap().time_gap;
            if ratio > 0.0 { prop_assert!(gap < 0.0) }
            else if ratio < 0.0 { prop_assert!(gap > 0.0) }
            else { prop_assert!(gap == 0.0) }
        }

        #[test]
        fn kinematics_respect_limits(
            vx in -20.0f64..20.0, vy in -20.0f64..20.0,
            ax in -50.0f64..50.0, ay in -50.0f64..50.0,
        ) {
            let v0 = clamp_norm([vx, vy], 20.0);
            let (q, v) = update_kinematics([1.0, 2.0, 100.0], v0, [ax, ay], 1.0, 20.0, 5.0);
            prop_assert!(norm2(v) <= 20.0);
            prop_assert_eq!(q[2], 100.0);
            let a = clamp_norm([ax, ay], 5.0);
            prop_assert!(norm2(a) <= 5.0);
        }
    }

    #[test]
    fn uav_energy_monotone_when_workload_binds() {
        let t = task(1e6, 1000.0);
        let mut last = 0.0;
        for i in 0..=20 {
            let alpha = i as f64 / 20.0;
            // 1e10 cycles/s over 0.9 s always covers the workload, so the min picks α D C.
            let e = uav_compute(alpha, &t, 0.1, 1e10, 0.0, 1e-26).unwrap().energy;
            assert!(e >= last);
            last = e;
        }
        let mut last = 0.0;
        for i in 1..=20 {
            let f = 1e9 * i as f64;
            let e = uav_compute(0.1, &t, 0.1, f, 0.0, 1e-26).unwrap().energy;
            assert!(e >= last);
            last = e;
        }
    }

    #[test]
    fn rate_monotonicity() {
        let mut last = f64::INFINITY;
        for d in [10.0, 50.0, 100.0, 300.0, 1000.0] {
            let h = channel_gain(&[0.0, 0.0, 100.0], &[d, 0.0, 0.0], 1e-3).unwrap();
            let r = uplink_rate(h, 0.5, 2e6, 12, 1e-16);
            assert!(r < last);
            last = r;
        }
        let mut last = 0.0;
        for p in [0.1, 0.2, 0.5, 1.0] {
            let r = uplink_rate(1e-7, p, 2e6, 12, 1e-16);
            assert!(r > last);
            last = r;
        }
        let mut last = 0.0;
        for b in [1e6, 2e6, 3e6, 5e6] {
            let r = uplink_rate(1e-7, 0.5, b, 12, 1e-16);
            assert!(r > last);
            last = r;
        }
    }
}
