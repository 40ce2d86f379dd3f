//! First-order radio model and routing edge costs.
//!
//! Transmission uses the free-space (`d^2`) amplifier below the threshold
//! distance `d_o = sqrt(eps_fs / eps_mp)` and the multipath (`d^4`) amplifier
//! at or above it. One round is the time unit, so with the default
//! `round_time = 1` a per-second energy equals the per-message energy.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::network::{distance, NodeState, Position};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnergyParams {
    /// Electronics energy, J/bit.
    pub e_elec: f64,
    /// Free-space amplifier, J/bit/m^2.
    pub eps_fs: f64,
    /// Multipath amplifier, J/bit/m^4.
    pub eps_mp: f64,
    pub w1: f64,
    pub w2: f64,
    pub w3: f64,
    /// Seconds per round.
    pub round_time: f64,
}

impl Default for EnergyParams {
    fn default() -> Self {
        Self {
            e_elec: 50e-9,
            eps_fs: 10e-12,
            eps_mp: 0.0013e-12,
            w1: 1.0,
            w2: 1.0,
            w3: 1.0,
            round_time: 1.0,
        }
    }
}

/// A weighted edge cost together with its three components.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EdgeCost {
    pub value: f64,
    pub rx_part: f64,
    pub tx_part: f64,
    pub esf_part: f64,
}

impl EdgeCost {
    pub fn zero() -> Self {
        Self {
            value: 0.0,
            rx_part: 0.0,
            tx_part: 0.0,
            esf_part: 0.0,
        }
    }
}

fn check_bits(bits: f64) -> Result<()> {
    if bits > 0.0 && bits.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain(format!("message length must be positive, got {bits}")))
    }
}

impl EnergyParams {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("e_elec", self.e_elec),
            ("eps_fs", self.eps_fs),
            ("eps_mp", self.eps_mp),
            ("round_time", self.round_time),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::config(format!("{name} must be positive, got {v}")));
            }
        }
        for (name, v) in [("w1", self.w1), ("w2", self.w2), ("w3", self.w3)] {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(Error::config(format!("{name} must be non-negative, got {v}")));
            }
        }
        Ok(())
    }

    /// Threshold distance between the free-space and multipath regimes.
    pub fn d_o(&self) -> f64 {
        (self.eps_fs / self.eps_mp).sqrt()
    }

    /// Energy to transmit `bits` over `d` meters.
    pub fn tx_energy(&self, d: f64, bits: f64) -> Result<f64> {
        check_bits(bits)?;
        if !(d >= 0.0) {
            return Err(Error::Domain(format!("distance must be non-negative, got {d}")));
        }
        Ok(self.tx_cost(d, bits))
    }

    pub fn rx_energy(&self, bits: f64) -> Result<f64> {
        check_bits(bits)?;
        Ok(self.rx_cost(bits))
    }

    /// Data rate in bits per second for a message of `bits` per round.
    pub fn rate(&self, bits: f64) -> Result<f64> {
        check_bits(bits)?;
        Ok(bits / self.round_time)
    }

    // Unchecked forms for the simulation hot path; lengths there are
    // validated once at configuration time.
    pub(crate) fn tx_cost(&self, d: f64, bits: f64) -> f64 {
        let d2 = d * d;
        if d < self.d_o() {
            (self.e_elec + self.eps_fs * d2) * bits
        } else {
            (self.e_elec + self.eps_mp * d2 * d2) * bits
        }
    }

    pub(crate) fn rx_cost(&self, bits: f64) -> f64 {
        self.e_elec * bits
    }

    /// Cost of the directed head-to-head edge `i -> j` carrying `bits`.
    pub fn edge_cost(&self, i: &NodeState, j: &NodeState, bits: f64) -> Result<EdgeCost> {
        let rate = self.rate(bits)?;
        let rx_part = self.rx_cost(rate);
        let tx_part = self.tx_cost(distance(i.pos, j.pos), rate);
        let esf_part = energy_spent_so_far(i, j);
        Ok(EdgeCost {
            value: self.w1 * rx_part + self.w2 * tx_part + self.w3 * esf_part,
            rx_part,
            tx_part,
            esf_part,
        })
    }

    /// Cost of the final hop into the base station. The base station has no
    /// reception cost and never depletes, so only the sender's terms count.
    pub fn bs_edge_cost(&self, i: &NodeState, bs: Position, bits: f64) -> Result<EdgeCost> {
        let rate = self.rate(bits)?;
        let tx_part = self.tx_cost(distance(i.pos, bs), rate);
        let esf_part = i.spent();
        Ok(EdgeCost {
            value: self.w2 * tx_part + self.w3 * esf_part,
            rx_part: 0.0,
            tx_part,
            esf_part,
        })
    }
}

/// `(I - e_i) + (I - e_j)`.
pub fn energy_spent_so_far(i: &NodeState, j: &NodeState) -> f64 {
    i.spent() + j.spent()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn node(id: usize, x: f64, initial: f64, energy: f64) -> NodeState {
        let mut n = NodeState::new(id, Position::new(x, 0.0), initial, 1000, 1000);
        n.energy = energy;
        n
    }

    #[test]
    fn tx_free_space_and_multipath() {
        let p = EnergyParams::default();
        assert_relative_eq!(p.tx_energy(50.0, 2000.0).unwrap(), 1.5e-4, max_relative = 1e-12);
        assert_relative_eq!(p.tx_energy(100.0, 1000.0).unwrap(), 1.8e-4, max_relative = 1e-12);
    }

    #[test]
    fn tx_continuous_at_threshold() {
        let p = EnergyParams::default();
        let d_o = p.d_o();
        let fs = (p.e_elec + p.eps_fs * d_o * d_o) * 1000.0;
        let mp = (p.e_elec + p.eps_mp * d_o.powi(4)) * 1000.0;
        assert_relative_eq!(fs, mp, max_relative = 1e-9);
        assert_relative_eq!(p.tx_energy(d_o, 1000.0).unwrap(), fs, max_relative = 1e-9);
    }

    #[test]
    fn rx_examples() {
        let p = EnergyParams::default();
        assert_relative_eq!(p.rx_energy(4000.0).unwrap(), 2.0e-4, max_relative = 1e-12);
        assert_relative_eq!(p.rx_energy(1.0).unwrap(), 5.0e-8, max_relative = 1e-12);
        assert_eq!(p.rx_energy(200.0).unwrap() * 2.0, p.rx_energy(400.0).unwrap());
    }

    #[test]
    fn non_positive_length_is_domain_error() {
        let p = EnergyParams::default();
        assert!(matches!(p.tx_energy(10.0, 0.0), Err(Error::Domain(_))));
        assert!(matches!(p.rx_energy(-1.0), Err(Error::Domain(_))));
        assert!(matches!(p.rate(0.0), Err(Error::Domain(_))));
    }

    #[test]
    fn rate_examples() {
        let mut p = EnergyParams::default();
        assert_eq!(p.rate(4000.0).unwrap(), 4000.0);
        p.round_time = 2.0;
        assert_eq!(p.rate(4000.0).unwrap(), 2000.0);
        p.round_time = 4.0;
        assert_eq!(p.rate(4000.0).unwrap(), 1000.0);
    }

    #[test]
    fn energy_spent_so_far_examples() {
        assert_eq!(energy_spent_so_far(&node(0, 0.0, 2.0, 2.0), &node(1, 1.0, 2.0, 2.0)), 0.0);
        assert_eq!(energy_spent_so_far(&node(0, 0.0, 2.0, 1.5), &node(1, 1.0, 2.0, 0.5)), 2.0);
        assert_eq!(energy_spent_so_far(&node(0, 0.0, 5.0, 4.0), &node(1, 1.0, 5.0, 4.0)), 2.0);
    }

    #[test]
    fn edge_cost_composition() {
        let p = EnergyParams::default();
        let c = p.edge_cost(&node(0, 0.0, 2.0, 2.0), &node(1, 50.0, 2.0, 2.0), 4000.0).unwrap();
        assert_relative_eq!(c.rx_part, 2e-4, max_relative = 1e-12);
        assert_relative_eq!(c.tx_part, 3e-4, max_relative = 1e-12);
        assert_eq!(c.esf_part, 0.0);
        assert_relative_eq!(c.value, 5e-4, max_relative = 1e-12);

        let zero = EnergyParams {
            w1: 0.0,
            w2: 0.0,
            w3: 0.0,
            ..EnergyParams::default()
        };
        let c = zero.edge_cost(&node(0, 0.0, 2.0, 1.0), &node(1, 50.0, 2.0, 0.3), 4000.0).unwrap();
        assert_eq!(c.value, 0.0);
    }

    #[test]
    fn bs_edge_cost_examples() {
        let p = EnergyParams::default();
        let bs = Position::new(50.0, 0.0);
        let fresh = p.bs_edge_cost(&node(0, 0.0, 2.0, 2.0), bs, 4000.0).unwrap();
        assert_eq!(fresh.value, p.w2 * fresh.tx_part);
        assert_eq!(fresh.rx_part, 0.0);

        let drained = p.bs_edge_cost(&node(0, 0.0, 2.0, 1.0), bs, 4000.0).unwrap();
        assert_relative_eq!(drained.value, 1.0003, max_relative = 1e-12);
        assert_eq!(drained.value, drained.tx_part + drained.esf_part);
    }

    proptest! {
        #[test]
        fn tx_monotone_in_distance_and_length(d in 0.0..400.0f64, dd in 0.01..50.0f64, l in 1.0..1e4f64, dl in 1.0..1e3f64) {
            let p = EnergyParams::default();
            let base = p.tx_energy(d, l).unwrap();
            prop_assert!(p.tx_energy(d + dd, l).unwrap() > base);
            prop_assert!(p.tx_energy(d, l + dl).unwrap() > base);
            prop_assert!(p.rx_energy(l + dl).unwrap() > p.rx_energy(l).unwrap());
        }

        #[test]
        fn edge_cost_decomposes_and_is_symmetric(
            xi in 0.0..250.0f64, xj in 0.0..250.0f64,
            ei in 0.01..2.0f64, ej in 0.01..2.0f64,
            w in prop::array::uniform3(0.0..3.0f64),
            l in 1.0..8000.0f64,
        ) {
            let p = EnergyParams { w1: w[0], w2: w[1], w3: w[2], ..EnergyParams::default() };
            let i = node(0, xi, 2.0, ei);
            let j = node(1, xj, 2.0, ej);
            let a = p.edge_cost(&i, &j, l).unwrap();
            let b = p.edge_cost(&j, &i, l).unwrap();
            let recomposed = p.w1 * a.rx_part + p.w2 * a.tx_part + p.w3 * a.esf_part;
            prop_assert!((a.value - recomposed).abs() <= 4.0 * f64::EPSILON * a.value.abs().max(1e-300));
            prop_assert_eq!(a.value, b.value);
            prop_assert!(a.value >= 0.0);
        }
    }
}
