//! Gray-coded square and rectangular M-QAM with unit average energy.

use crate::error::{invalid, Result};
use crate::C64;

/// A Gray-labelled QAM constellation. `points[b]` is the symbol carrying the
/// bit pattern `b` (MSBs on the in-phase rail, LSBs on the quadrature rail).
#[derive(Debug, Clone, PartialEq)]
pub struct Constellation {
    points: Vec<C64>,
}

fn gray_to_binary(mut g: usize) -> usize {
    let mut b = g;
    while g > 0 {
        g >>= 1;
        b ^= g;
    }
    b
}

impl Constellation {
    /// Builds `order`-QAM. `order` must be a power of two; odd bit counts give
    /// a rectangular grid with the extra bit on the in-phase rail, and
    /// `order == 1` is the single point `1`.
    pub fn qam(order: usize) -> Result<Self> {
        if order == 0 || !order.is_power_of_two() {
            return Err(invalid(format!("modulation order {order} is not a power of two")));
        }
        if order == 1 {
            return Ok(Self { points: vec![C64::new(1.0, 0.0)] });
        }
        let bits = order.trailing_zeros() as usize;
        let bits_q = bits / 2;
        let bits_i = bits - bits_q;
        let levels_i = 1usize << bits_i;
        let levels_q = 1usize << bits_q;

        let level = |idx: usize, count: usize| (2 * idx) as f64 - (count as f64 - 1.0);
        let mut points: Vec<C64> = (0..order)
            .map(|label| {
                let gi = label >> bits_q;
                let gq = label & (levels_q - 1);
                C64::new(
                    level(gray_to_binary(gi), levels_i),
                    if levels_q == 1 { 0.0 } else { level(gray_to_binary(gq), levels_q) },
                )
            })
            .collect();
        let energy = points.iter().map(|p| p.norm_sqr()).sum::<f64>() / order as f64;
        let norm = energy.sqrt();
        for p in &mut points {
            *p /= norm;
        }
        Ok(Self { points })
    }

    pub fn order(&self) -> usize {
        self.points.len()
    }

    pub fn bits(&self) -> usize {
        self.points.len().trailing_zeros() as usize
    }

    pub fn point(&self, label: usize) -> C64 {
        self.points[label]
    }

    pub fn points(&self) -> &[C64] {
        &self.points
    }

    /// True when every point has a non-zero imaginary part.
    pub fn is_complex(&self) -> bool {
        self.points.iter().all(|p| p.im.abs() > 1e-12)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unit_energy() {
        for m in [1, 2, 4, 8, 16, 32, 64] {
            let c = Constellation::qam(m).unwrap();
            let e: f64 = c.points().iter().map(|p| p.norm_sqr()).sum::<f64>() / m as f64;
            assert!((e - 1.0).abs() < 1e-12, "M={m}");
        }
    }

    #[test]
    fn gray_neighbours_differ_by_one_bit() {
        for m in [4, 8, 16, 64] {
            let c = Constellation::qam(m).unwrap();
            let dmin = (0..m)
                .flat_map(|a| (0..m).filter(move |&b| b != a).map(move |b| (a, b)))
                .map(|(a, b)| (c.point(a) - c.point(b)).norm())
                .fold(f64::INFINITY, f64::min);
            for a in 0..m {
                for b in 0..m {
                    if a != b && ((c.point(a) - c.point(b)).norm() - dmin).abs() < 1e-9 {
                        assert_eq!((a ^ b).count_ones(), 1, "M={m} {a} {b}");
                    }
                }
            }
        }
    }

    #[test]
    fn sixteen_qam_fourth_moment() {
        let c = Constellation::qam(16).unwrap();
        let m4: f64 = c.points().iter().map(|p| p.norm_sqr().powi(2)).sum::<f64>() / 16.0;
        assert!((m4 - 1.32).abs() < 1e-12);
    }

    #[test]
    fn rejects_non_power_of_two() {
        assert!(Constellation::qam(6).is_err());
        assert!(Constellation::qam(0).is_err());
    }
}
