//! Standard normal distribution functions.
//!
//! `erfc` is a port of the rational approximations in FreeBSD's
//! `lib/msun/src/s_erf.c` (via Go's `math/erf.go`), which keep the error
//! below one ulp on every interval. The original notice:
//!
//! ```text
//! Copyright (C) 1993 by Sun Microsystems, Inc. All rights reserved.
//!
//! Developed at SunPro, a Sun Microsystems, Inc. business.
//! Permission to use, copy, modify, and distribute this
//! software is freely granted, provided that this notice
//! is preserved.
//! ```
//!
//! Interval layout for `erfc(x)`, `x >= 0`:
//!
//! 1. `[0, 0.84375)`: `erf(x) = x + x*P(x²)/Q(x²)`, `erfc = 1 - erf`.
//! 2. `[0.84375, 1.25)`: `erfc(x) = (1 - c) - P1(s)/Q1(s)` with `s = x - 1`.
//! 3. `[1.25, 28)`: `erfc(x) = exp(-x² - 0.5625 + R(1/x²)/S(1/x²)) / x`,
//!    with separate rational fits below and above `1/0.35`.
//! 4. `[28, ∞)`: underflows to 0.
//!
//! Negative arguments use `erfc(-x) = 2 - erfc(x)`.

use std::f64::consts::FRAC_1_SQRT_2;

const ERX: f64 = 8.45062911510467529297e-01;

const PP0: f64 = 1.28379167095512558561e-01;
const PP1: f64 = -3.25042107247001499370e-01;
const PP2: f64 = -2.84817495755985104766e-02;
const PP3: f64 = -5.77027029648944159157e-03;
const PP4: f64 = -2.37630166566501626084e-05;
const QQ1: f64 = 3.97917223959155352819e-01;
const QQ2: f64 = 6.50222499887672944485e-02;
const QQ3: f64 = 5.08130628187576562776e-03;
const QQ4: f64 = 1.32494738004321644526e-04;
const QQ5: f64 = -3.96022827877536812320e-06;

const PA0: f64 = -2.36211856075265944077e-03;
const PA1: f64 = 4.14856118683748331666e-01;
const PA2: f64 = -3.72207876035701323847e-01;
const PA3: f64 = 3.18346619901161753674e-01;
const PA4: f64 = -1.10894694282396677476e-01;
const PA5: f64 = 3.54783043256182359371e-02;
const PA6: f64 = -2.16637559486879084300e-03;
const QA1: f64 = 1.06420880400844228286e-01;
const QA2: f64 = 5.40397917702171048937e-01;
const QA3: f64 = 7.18286544141962662868e-02;
const QA4: f64 = 1.26171219808761642112e-01;
const QA5: f64 = 1.36370839120290507362e-02;
const QA6: f64 = 1.19844998467991074170e-02;

const RA0: f64 = -9.86494403484714822705e-03;
const RA1: f64 = -6.93858572707181764372e-01;
const RA2: f64 = -1.05586262253232909814e+01;
const RA3: f64 = -6.23753324503260060396e+01;
const RA4: f64 = -1.62396669462573470355e+02;
const RA5: f64 = -1.84605092906711035994e+02;
const RA6: f64 = -8.12874355063065934246e+01;
const RA7: f64 = -9.81432934416914548592e+00;
const SA1: f64 = 1.96512716674392571292e+01;
const SA2: f64 = 1.37657754143519042600e+02;
const SA3: f64 = 4.34565877475229228821e+02;
const SA4: f64 = 6.45387271733267880336e+02;
const SA5: f64 = 4.29008140027567833386e+02;
const SA6: f64 = 1.08635005541779435134e+02;
const SA7: f64 = 6.57024977031928170135e+00;
const SA8: f64 = -6.04244152148580987438e-02;

const RB0: f64 = -9.86494292470009928597e-03;
const RB1: f64 = -7.99283237680523006574e-01;
const RB2: f64 = -1.77579549177547519889e+01;
const RB3: f64 = -1.60636384855821916062e+02;
const RB4: f64 = -6.37566443368389627722e+02;
const RB5: f64 = -1.02509513161107724954e+03;
const RB6: f64 = -4.83519191608651397019e+02;
const SB1: f64 = 3.03380607434824582924e+01;
const SB2: f64 = 3.25792512996573918826e+02;
const SB3: f64 = 1.53672958608443695994e+03;
const SB4: f64 = 3.19985821950859553908e+03;
const SB5: f64 = 2.55305040643316442583e+03;
const SB6: f64 = 4.74528541206955367215e+02;
const SB7: f64 = -2.24409524465858183362e+01;

/// 2^-56
const TINY: f64 = 1.387_778_780_781_445_7e-17;

/// Complementary error function.
pub fn erfc(x: f64) -> f64 {
    if x.is_nan() {
        return f64::NAN;
    }
    if x == f64::INFINITY {
        return 0.0;
    }
    if x == f64::NEG_INFINITY {
        return 2.0;
    }
    let negative = x < 0.0;
    let a = x.abs();

    if a < 0.84375 {
        let t = if a < TINY {
            a
        } else {
            let z = a * a;
            let r = PP0 + z * (PP1 + z * (PP2 + z * (PP3 + z * PP4)));
            let s = 1.0 + z * (QQ1 + z * (QQ2 + z * (QQ3 + z * (QQ4 + z * QQ5))));
            let y = r / s;
            if a < 0.25 {
                a + a * y
            } else {
                0.5 + (a * y + (a - 0.5))
            }
        };
        return if negative { 1.0 + t } else { 1.0 - t };
    }

    if a < 1.25 {
        let s = a - 1.0;
        let p = PA0 + s * (PA1 + s * (PA2 + s * (PA3 + s * (PA4 + s * (PA5 + s * PA6)))));
        let q = 1.0 + s * (QA1 + s * (QA2 + s * (QA3 + s * (QA4 + s * (QA5 + s * QA6)))));
        return if negative {
            1.0 + ERX + p / q
        } else {
            1.0 - ERX - p / q
        };
    }

    if a < 28.0 {
        let s = 1.0 / (a * a);
        let (r, ss) = if a < 1.0 / 0.35 {
            (
                RA0 + s * (RA1 + s * (RA2 + s * (RA3 + s * (RA4 + s * (RA5 + s * (RA6 + s * RA7)))))),
                1.0 + s
                    * (SA1
                        + s * (SA2 + s * (SA3 + s * (SA4 + s * (SA5 + s * (SA6 + s * (SA7 + s * SA8))))))),
            )
        } else {
            if negative && a > 6.0 {
                return 2.0;
            }
            (
                RB0 + s * (RB1 + s * (RB2 + s * (RB3 + s * (RB4 + s * (RB5 + s * RB6))))),
                1.0 + s * (SB1 + s * (SB2 + s * (SB3 + s * (SB4 + s * (SB5 + s * (SB6 + s * SB7)))))),
            )
        };
        // z carries the high 32 bits of a so that -z*z is exact.
        let z = f64::from_bits(a.to_bits() & 0xffff_ffff_0000_0000);
        let e = (-z * z - 0.5625).exp() * ((z - a) * (z + a) + r / ss).exp();
        return if negative { 2.0 - e / a } else { e / a };
    }

    if negative {
        2.0
    } else {
        0.0
    }
}

/// Standard normal CDF, Φ(x) = erfc(-x/√2)/2.
pub fn normal_cdf(x: f64) -> f64 {
    0.5 * erfc(-x * FRAC_1_SQRT_2)
}

/// Standard normal density.
pub fn normal_pdf(x: f64) -> f64 {
    const INV_SQRT_2PI: f64 = 0.398_942_280_401_432_7;
    INV_SQRT_2PI * (-0.5 * x * x).exp()
}

#[cfg(test)]
mod tests {
    use super::*;

    // Φ at x = -8, -7.75, ..., 8 from a 50-digit evaluation.
    const REFERENCE: [(f64, f64); 65] = [
        (-8.0, 6.2209605742717841e-16),
        (-7.75, 4.5946274357785955e-15),
        (-7.5, 3.1908916729108962e-14),
        (-7.25, 2.0838581586720694e-13),
        (-7.0, 1.279812543885835e-12),
        (-6.75, 7.3922577780178224e-12),
        (-6.5, 4.0160005838591178e-11),
        (-6.25, 2.0522634252189389e-10),
        (-6.0, 9.8658764503769814e-10),
        (-5.75, 4.4621724539016119e-9),
        (-5.5, 1.8989562465887719e-8),
        (-5.25, 7.6049605164887143e-8),
        (-5.0, 2.8665157187919391e-7),
        (-4.75, 1.0170832425687032e-6),
        (-4.5, 3.3976731247300604e-6),
        (-4.25, 1.068852577493442e-5),
        (-4.0, 3.1671241833119921e-5),
        (-3.75, 8.8417285200803868e-5),
        (-3.5, 0.00023262907903552504),
        (-3.25, 0.00057702504239076704),
        (-3.0, 0.0013498980316300945),
        (-2.75, 0.0029797632350545568),
        (-2.5, 0.0062096653257761352),
        (-2.25, 0.012224472655044703),
        (-2.0, 0.022750131948179207),
        (-1.75, 0.04005915686381709),
        (-1.5, 0.066807201268858066),
        (-1.25, 0.10564977366685526),
        (-1.0, 0.15865525393145705),
        (-0.75, 0.2266273523768682),
        (-0.5, 0.3085375387259869),
        (-0.25, 0.40129367431707628),
        (0.0, 0.5),
        (0.25, 0.59870632568292372),
        (0.5, 0.6914624612740131),
        (0.75, 0.7733726476231318),
        (1.0, 0.84134474606854295),
        (1.25, 0.89435022633314474),
        (1.5, 0.93319279873114193),
        (1.75, 0.95994084313618291),
        (2.0, 0.97724986805182079),
        (2.25, 0.9877755273449553),
        (2.5, 0.99379033467422386),
        (2.75, 0.99702023676494544),
        (3.0, 0.99865010196836991),
        (3.25, 0.99942297495760923),
        (3.5, 0.99976737092096447),
        (3.75, 0.9999115827147992),
        (4.0, 0.99996832875816688),
        (4.25, 0.99998931147422507),
        (4.5, 0.99999660232687527),
        (4.75, 0.99999898291675743),
        (5.0, 0.99999971334842812),
        (5.25, 0.99999992395039484),
        (5.5, 0.99999998101043753),
        (5.75, 0.99999999553782755),
        (6.0, 0.99999999901341235),
        (6.25, 0.99999999979477366),
        (6.5, 0.99999999995983999),
        (6.75, 0.99999999999260774),
        (7.0, 0.99999999999872019),
        (7.25, 0.99999999999979161),
        (7.5, 0.99999999999996809),
        (7.75, 0.99999999999999541),
        (8.0, 0.99999999999999938),
    ];

    #[test]
    fn matches_reference_table() {
        for (x, want) in REFERENCE {
            let got = normal_cdf(x);
            assert!((got - want).abs() <= 1e-12, "Φ({x}) = {got}, want {want}");
            // Relative accuracy holds in the lower tail too.
            if x < 0.0 {
                assert!(((got - want) / want).abs() < 1e-13, "Φ({x}) relative");
            }
        }
    }

    #[test]
    fn worked_values() {
        assert_eq!(normal_cdf(0.0), 0.5);
        assert!((normal_cdf(1.0) - 0.8413447460685429).abs() < 1e-15);
        assert!((normal_cdf(-2.5) - (1.0 - normal_cdf(2.5))).abs() < 1e-15);
    }

    #[test]
    fn reflection_and_monotonicity_on_grid() {
        let mut prev = 0.0;
        for i in 0..=16_000 {
            let x = -8.0 + i as f64 * 1e-3;
            let p = normal_cdf(x);
            assert!(p >= prev, "not monotone at {x}");
            prev = p;
            assert!((p + normal_cdf(-x) - 1.0).abs() <= 1e-14, "reflection at {x}");
        }
    }

    #[test]
    fn limits() {
        assert_eq!(normal_cdf(f64::INFINITY), 1.0);
        assert_eq!(normal_cdf(f64::NEG_INFINITY), 0.0);
        assert_eq!(normal_cdf(-40.0), 0.0);
        assert!(erfc(f64::NAN).is_nan());
    }
}
