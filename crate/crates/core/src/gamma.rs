//! Complex log-gamma on the continuous branch that is real on the positive axis.

use core::f64::consts::PI;

use crate::mat::C64;

/// `B_{2k} / (2k (2k - 1))` for k = 1..=8.
const STIRLING: [f64; 8] = [
    1.0 / 12.0,
    -1.0 / 360.0,
    1.0 / 1260.0,
    -1.0 / 1680.0,
    1.0 / 1188.0,
    -691.0 / 360_360.0,
    1.0 / 156.0,
    -3617.0 / 122_400.0,
];

const SHIFT_TARGET: f64 = 15.0;

/// `ln Γ(z)`. Left of `Re z = 1/2` the reflection formula is used, which fixes
/// the imaginary part only modulo `2π`.
pub fn ln_gamma(z: C64) -> C64 {
    if z.re < 0.5 {
        let ln_pi = C64::new(libm::log(PI), 0.0);
        return ln_pi - (z * PI).sin().ln() - ln_gamma(C64::new(1.0, 0.0) - z);
    }
    let mut w = z;
    let mut shift = C64::new(0.0, 0.0);
    while w.re < SHIFT_TARGET {
        shift += w.ln();
        w += 1.0;
    }
    stirling(w) - shift
}

fn stirling(w: C64) -> C64 {
    let half_ln_two_pi = 0.5 * libm::log(2.0 * PI);
    let inv = w.inv();
    let inv_sq = inv * inv;
    let mut series = C64::new(0.0, 0.0);
    let mut power = inv;
    for c in STIRLING {
        series += power * c;
        power *= inv_sq;
    }
    (w - 0.5) * w.ln() - w + half_ln_two_pi + series
}

#[cfg(test)]
mod tests {
    use super::*;

    const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

    /// Weierstrass product, summed to `terms` plus the leading `z²/(2n)` tail.
    fn weierstrass(z: C64, terms: usize) -> C64 {
        let mut acc = -z * EULER_GAMMA - z.ln();
        for k in 1..=terms {
            let zk = z / k as f64;
            acc += zk - (zk + 1.0).ln();
        }
        acc + z * z / (2.0 * terms as f64)
    }

    #[test]
    fn real_axis_values() {
        assert!(ln_gamma(C64::new(1.0, 0.0)).norm() < 1e-14);
        assert!(ln_gamma(C64::new(2.0, 0.0)).norm() < 1e-14);
        let half = ln_gamma(C64::new(0.5, 0.0));
        assert!((half.re - 0.5 * libm::log(PI)).abs() < 1e-14);
        let big = ln_gamma(C64::new(30.0, 0.0));
        assert!((big.re - 71.257_038_967_168_01).abs() < 1e-11);
    }

    #[test]
    fn agrees_with_product_definition_on_the_stroke_line() {
        for delta in [0.05, 0.25, 0.5, 1.0, 1.5, 2.0] {
            let z = C64::new(1.0, -delta);
            let diff = ln_gamma(z) - weierstrass(z, 2_000_000);
            assert!(diff.norm() < 5e-10, "delta {delta}: {diff}");
        }
    }

    #[test]
    fn frozen_high_precision_values() {
        // arbitrary-precision reference values of ln Γ(1 - iδ)
        let cases = [
            (1.0, -0.650_923_199_301_856_3, 0.301_640_320_467_533_2),
            (0.5, -0.190_945_499_186_779_36, 0.244_058_298_905_427_76),
            (2.0, -1.876_078_786_430_929_3, -0.129_646_316_309_788_3),
            (10.0, -13.637_732_188_247_27, -13.802_912_974_229_9),
            (0.1, -0.008_197_780_565_405_957, 0.057_322_940_416_719_72),
        ];
        for (delta, re, im) in cases {
            let v = ln_gamma(C64::new(1.0, -delta));
            assert!((v.re - re).abs() < 1e-12 * re.abs().max(1.0), "delta {delta}");
            assert!((v.im - im).abs() < 1e-12 * im.abs().max(1.0), "delta {delta}");
        }
    }

    #[test]
    fn reflection_branch_matches_recurrence() {
        // Γ(z+1) = z Γ(z) holds up to a 2πi multiple across the reflection cut
        let z = C64::new(0.2, 0.7);
        let lhs = ln_gamma(z + 1.0);
        let rhs = ln_gamma(z) + z.ln();
        let d = lhs - rhs;
        assert!((d.re).abs() < 1e-12);
        let turns = d.im / (2.0 * PI);
        assert!((turns - libm::round(turns)).abs() < 1e-12);
    }
}
