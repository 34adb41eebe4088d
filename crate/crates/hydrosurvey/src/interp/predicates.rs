//! Robust orientation and in-circumcircle predicates.
//!
//! Both predicates follow Shewchuk's scheme (<https://www.cs.cmu.edu/~quake/robust.html>):
//! a fast floating-point evaluation guarded by a static error bound, falling
//! back to an exact evaluation with nonoverlapping floating-point expansions
//! when the fast result cannot be trusted. The exact path trades Shewchuk's
//! intermediate adaptive stages for a direct exact determinant, which keeps
//! the code short; the fallback only triggers near degeneracy, so speed there
//! is irrelevant at survey scale.

/// 2^27 + 1, splits a double into two 26-bit halves.
const SPLITTER: f64 = 134_217_729.0;
/// Half an ulp of 1.0 (2^-53).
const EPSILON: f64 = 1.110_223_024_625_156_5e-16;

const CCW_ERRBOUND_A: f64 = (3.0 + 16.0 * EPSILON) * EPSILON;
const ICC_ERRBOUND_A: f64 = (10.0 + 96.0 * EPSILON) * EPSILON;

#[inline]
fn fast_two_sum(a: f64, b: f64) -> (f64, f64) {
    // requires |a| >= |b|
    let x = a + b;
    let bvirt = x - a;
    (x, b - bvirt)
}

#[inline]
fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let x = a + b;
    let bvirt = x - a;
    let avirt = x - bvirt;
    let bround = b - bvirt;
    let around = a - avirt;
    (x, around + bround)
}

#[inline]
fn two_diff(a: f64, b: f64) -> (f64, f64) {
    let x = a - b;
    let bvirt = a - x;
    let avirt = x + bvirt;
    let bround = bvirt - b;
    let around = a - avirt;
    (x, around + bround)
}

#[inline]
fn split(a: f64) -> (f64, f64) {
    let c = SPLITTER * a;
    let abig = c - a;
    let ahi = c - abig;
    (ahi, a - ahi)
}

#[inline]
fn two_product(a: f64, b: f64) -> (f64, f64) {
    let x = a * b;
    let (ahi, alo) = split(a);
    let (bhi, blo) = split(b);
    let err = x - ahi * bhi - alo * bhi - ahi * blo;
    (x, alo * blo - err)
}

/// `(a1, a0) - (b1, b0)` as a four-component expansion, least significant
/// component first.
#[inline]
fn two_two_diff(a1: f64, a0: f64, b1: f64, b0: f64) -> [f64; 4] {
    let (i, x0) = two_diff(a0, b0);
    let (j, q) = two_sum(a1, i);
    let (i2, x1) = two_diff(q, b1);
    let (x3, x2) = two_sum(j, i2);
    [x0, x1, x2, x3]
}

/// Merges two nonoverlapping expansions (least significant first) into one,
/// dropping zero components. Exact.
fn fast_expansion_sum_zeroelim(e: &[f64], f: &[f64]) -> Vec<f64> {
    let mut h: Vec<f64> = Vec::with_capacity(e.len() + f.len() + 1);
    let mut ei = 0usize;
    let mut fi = 0usize;
    // true when the next component of e has the smaller magnitude
    let e_smaller = |ei: usize, fi: usize| -> bool {
        if ei >= e.len() {
            false
        } else if fi >= f.len() {
            true
        } else {
            let (enow, fnow) = (e[ei], f[fi]);
            (fnow > enow) == (fnow > -enow)
        }
    };
    let mut q = if e_smaller(ei, fi) {
        ei += 1;
        e[ei - 1]
    } else {
        fi += 1;
        f[fi - 1]
    };
    let mut first = true;
    while ei < e.len() || fi < f.len() {
        let now = if e_smaller(ei, fi) {
            ei += 1;
            e[ei - 1]
        } else {
            fi += 1;
            f[fi - 1]
        };
        let (qnew, hh) = if first {
            first = false;
            fast_two_sum(now, q)
        } else {
            two_sum(q, now)
        };
        q = qnew;
        if hh != 0.0 {
            h.push(hh);
        }
    }
    if q != 0.0 || h.is_empty() {
        h.push(q);
    }
    h
}

/// Multiplies an expansion by a scalar, dropping zero components. Exact.
fn scale_expansion_zeroelim(e: &[f64], b: f64) -> Vec<f64> {
    let mut h: Vec<f64> = Vec::with_capacity(2 * e.len() + 1);
    let (bhi, blo) = split(b);
    let two_product_presplit = |a: f64| -> (f64, f64) {
        let x = a * b;
        let (ahi, alo) = split(a);
        let err = x - ahi * bhi - alo * bhi - ahi * blo;
        (x, alo * blo - err)
    };
    let (mut q, hh) = two_product_presplit(e[0]);
    if hh != 0.0 {
        h.push(hh);
    }
    for &enow in &e[1..] {
        let (p1, p0) = two_product_presplit(enow);
        let (sum, hh1) = two_sum(q, p0);
        if hh1 != 0.0 {
            h.push(hh1);
        }
        let (qnew, hh2) = fast_two_sum(p1, sum);
        q = qnew;
        if hh2 != 0.0 {
            h.push(hh2);
        }
    }
    if q != 0.0 || h.is_empty() {
        h.push(q);
    }
    h
}

fn negate(e: &[f64]) -> Vec<f64> {
    e.iter().map(|v| -v).collect()
}

/// The sign of a zero-eliminated expansion is the sign of its most
/// significant (last) component.
fn expansion_sign_value(e: &[f64]) -> f64 {
    *e.last().unwrap_or(&0.0)
}

/// `px * qy - py * qx` as an exact four-component expansion.
#[inline]
fn minor(px: f64, py: f64, qx: f64, qy: f64) -> [f64; 4] {
    let (d1, d0) = two_product(px, qy);
    let (e1, e0) = two_product(py, qx);
    two_two_diff(d1, d0, e1, e0)
}

/// Orientation of `c` relative to the directed line `a -> b`.
///
/// Positive if `a`, `b`, `c` wind counter-clockwise, negative if clockwise,
/// exactly zero if collinear. Only the sign is guaranteed; the magnitude is
/// approximate (twice the signed triangle area).
pub fn orient2d(a: [f64; 2], b: [f64; 2], c: [f64; 2]) -> f64 {
    let detleft = (a[0] - c[0]) * (b[1] - c[1]);
    let detright = (a[1] - c[1]) * (b[0] - c[0]);
    let det = detleft - detright;

    let detsum = if detleft > 0.0 {
        if detright <= 0.0 {
            return det;
        }
        detleft + detright
    } else if detleft < 0.0 {
        if detright >= 0.0 {
            return det;
        }
        -detleft - detright
    } else {
        return det;
    };
    let errbound = CCW_ERRBOUND_A * detsum;
    if det >= errbound || -det >= errbound {
        return det;
    }
    orient2d_exact(a, b, c)
}

fn orient2d_exact(a: [f64; 2], b: [f64; 2], c: [f64; 2]) -> f64 {
    // det = (ax by - ay bx) - (ax cy - ay cx) + (bx cy - by cx)
    let m_ab = minor(a[0], a[1], b[0], b[1]);
    let m_ac = minor(a[0], a[1], c[0], c[1]);
    let m_bc = minor(b[0], b[1], c[0], c[1]);
    let partial = fast_expansion_sum_zeroelim(&m_ab, &negate(&m_ac));
    let det = fast_expansion_sum_zeroelim(&partial, &m_bc);
    expansion_sign_value(&det)
}

/// In-circumcircle test. For `a`, `b`, `c` in counter-clockwise order,
/// positive means `d` lies strictly inside their circumcircle, negative
/// strictly outside, exactly zero cocircular.
pub fn incircle(a: [f64; 2], b: [f64; 2], c: [f64; 2], d: [f64; 2]) -> f64 {
    let adx = a[0] - d[0];
    let bdx = b[0] - d[0];
    let cdx = c[0] - d[0];
    let ady = a[1] - d[1];
    let bdy = b[1] - d[1];
    let cdy = c[1] - d[1];

    let bdxcdy = bdx * cdy;
    let cdxbdy = cdx * bdy;
    let alift = adx * adx + ady * ady;

    let cdxady = cdx * ady;
    let adxcdy = adx * cdy;
    let blift = bdx * bdx + bdy * bdy;

    let adxbdy = adx * bdy;
    let bdxady = bdx * ady;
    let clift = cdx * cdx + cdy * cdy;

    let det = alift * (bdxcdy - cdxbdy) + blift * (cdxady - adxcdy) + clift * (adxbdy - bdxady);

    let permanent = (bdxcdy.abs() + cdxbdy.abs()) * alift
        + (cdxady.abs() + adxcdy.abs()) * blift
        + (adxbdy.abs() + bdxady.abs()) * clift;
    let errbound = ICC_ERRBOUND_A * permanent;
    if det > errbound || -det > errbound {
        return det;
    }
    incircle_exact(a, b, c, d)
}

fn incircle_exact(pa: [f64; 2], pb: [f64; 2], pc: [f64; 2], pd: [f64; 2]) -> f64 {
    let ab = minor(pa[0], pa[1], pb[0], pb[1]);
    let bc = minor(pb[0], pb[1], pc[0], pc[1]);
    let cd = minor(pc[0], pc[1], pd[0], pd[1]);
    let da = minor(pd[0], pd[1], pa[0], pa[1]);
    let ac = minor(pa[0], pa[1], pc[0], pc[1]);
    let bd = minor(pb[0], pb[1], pd[0], pd[1]);

    let cda = fast_expansion_sum_zeroelim(&fast_expansion_sum_zeroelim(&cd, &da), &ac);
    let dab = fast_expansion_sum_zeroelim(&fast_expansion_sum_zeroelim(&da, &ab), &bd);
    let neg_bd = negate(&bd);
    let neg_ac = negate(&ac);
    let abc = fast_expansion_sum_zeroelim(&fast_expansion_sum_zeroelim(&ab, &bc), &neg_ac);
    let bcd = fast_expansion_sum_zeroelim(&fast_expansion_sum_zeroelim(&bc, &cd), &neg_bd);

    // lift each row: (x^2 + y^2) * cofactor, alternating signs
    let lifted = |e: &[f64], p: [f64; 2], sign: f64| -> Vec<f64> {
        let xdet = scale_expansion_zeroelim(&scale_expansion_zeroelim(e, p[0]), p[0] * sign);
        let ydet = scale_expansion_zeroelim(&scale_expansion_zeroelim(e, p[1]), p[1] * sign);
        fast_expansion_sum_zeroelim(&xdet, &ydet)
    };
    let adet = lifted(&bcd, pa, 1.0);
    let bdet = lifted(&cda, pb, -1.0);
    let cdet = lifted(&dab, pc, 1.0);
    let ddet = lifted(&abc, pd, -1.0);

    let abdet = fast_expansion_sum_zeroelim(&adet, &bdet);
    let cddet = fast_expansion_sum_zeroelim(&cdet, &ddet);
    let deter = fast_expansion_sum_zeroelim(&abdet, &cddet);
    expansion_sign_value(&deter)
}

#[cfg(test)]
mod tests {
    use super::*;
    use num::{BigRational, Signed, Zero};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn rat(v: f64) -> BigRational {
        BigRational::from_float(v).expect("finite")
    }

    fn sign(v: f64) -> i8 {
        if v > 0.0 {
            1
        } else if v < 0.0 {
            -1
        } else {
            0
        }
    }

    fn rat_sign(v: &BigRational) -> i8 {
        if v.is_zero() {
            0
        } else if v.is_positive() {
            1
        } else {
            -1
        }
    }

    /// Exact rational orientation, the independent oracle.
    fn orient_oracle(a: [f64; 2], b: [f64; 2], c: [f64; 2]) -> i8 {
        let det = (rat(a[0]) - rat(c[0])) * (rat(b[1]) - rat(c[1]))
            - (rat(a[1]) - rat(c[1])) * (rat(b[0]) - rat(c[0]));
        rat_sign(&det)
    }

    /// Exact rational in-circle determinant, the independent oracle.
    fn incircle_oracle(a: [f64; 2], b: [f64; 2], c: [f64; 2], d: [f64; 2]) -> i8 {
        let adx = rat(a[0]) - rat(d[0]);
        let ady = rat(a[1]) - rat(d[1]);
        let bdx = rat(b[0]) - rat(d[0]);
        let bdy = rat(b[1]) - rat(d[1]);
        let cdx = rat(c[0]) - rat(d[0]);
        let cdy = rat(c[1]) - rat(d[1]);
        let alift = &adx * &adx + &ady * &ady;
        let blift = &bdx * &bdx + &bdy * &bdy;
        let clift = &cdx * &cdx + &cdy * &cdy;
        let det = alift * (&bdx * &cdy - &cdx * &bdy)
            + blift * (&cdx * &ady - &adx * &cdy)
            + clift * (&adx * &bdy - &bdx * &ady);
        rat_sign(&det)
    }

    #[test]
    fn orient_known_cases() {
        assert!(orient2d([0.0, 0.0], [1.0, 0.0], [0.0, 1.0]) > 0.0);
        assert!(orient2d([0.0, 0.0], [0.0, 1.0], [1.0, 0.0]) < 0.0);
        assert_eq!(orient2d([0.0, 0.0], [1.0, 1.0], [2.0, 2.0]), 0.0);
        // collinear points that plain f64 arithmetic misjudges
        let a = [0.1, 0.1];
        let b = [0.3, 0.3];
        let c = [0.5, 0.5];
        assert_eq!(sign(orient2d(a, b, c)), orient_oracle(a, b, c));
    }

    #[test]
    fn incircle_known_cases() {
        let a = [0.0, 0.0];
        let b = [2.0, 0.0];
        let c = [0.0, 2.0];
        assert!(incircle(a, b, c, [0.5, 0.5]) > 0.0);
        assert!(incircle(a, b, c, [10.0, 10.0]) < 0.0);
        // fourth corner of the square is exactly cocircular
        assert_eq!(incircle(a, b, c, [2.0, 2.0]), 0.0);
    }

    #[test]
    fn orient_matches_rational_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(101);
        for i in 0..4000 {
            // quantized coordinates make exact degeneracies common
            let q = if i % 2 == 0 { 16.0 } else { 1024.0 };
            let mut p = || {
                [
                    (rng.random_range(-64..64) as f64) / q,
                    (rng.random_range(-64..64) as f64) / q,
                ]
            };
            let (a, b, c) = (p(), p(), p());
            assert_eq!(
                sign(orient2d(a, b, c)),
                orient_oracle(a, b, c),
                "a={a:?} b={b:?} c={c:?}"
            );
        }
    }

    #[test]
    fn orient_near_degenerate_perturbations() {
        // points on the line y = x, nudged by single ulps
        let base = [
            [12.0, 12.0],
            [24.000000000000004, 24.0],
            [48.0, 48.00000000000001],
            [96.0, 96.0],
        ];
        for &a in &base {
            for &b in &base {
                for &c in &base {
                    assert_eq!(sign(orient2d(a, b, c)), orient_oracle(a, b, c));
                }
            }
        }
    }

    #[test]
    fn incircle_matches_rational_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(202);
        let mut checked = 0usize;
        while checked < 2000 {
            let q = 32.0;
            let mut p = || {
                [
                    (rng.random_range(-48..48) as f64) / q,
                    (rng.random_range(-48..48) as f64) / q,
                ]
            };
            let (a, b, c, d) = (p(), p(), p(), p());
            if orient2d(a, b, c) <= 0.0 {
                continue; // predicate contract wants abc counter-clockwise
            }
            assert_eq!(
                sign(incircle(a, b, c, d)),
                incircle_oracle(a, b, c, d),
                "a={a:?} b={b:?} c={c:?} d={d:?}"
            );
            checked += 1;
        }
    }

    #[test]
    fn incircle_cocircular_grid() {
        // many exactly-cocircular quadruples: points on the circle x^2+y^2=25
        let circle: Vec<[f64; 2]> = vec![
            [5.0, 0.0],
            [4.0, 3.0],
            [3.0, 4.0],
            [0.0, 5.0],
            [-3.0, 4.0],
            [-4.0, 3.0],
            [-5.0, 0.0],
            [-4.0, -3.0],
            [-3.0, -4.0],
            [0.0, -5.0],
            [3.0, -4.0],
            [4.0, -3.0],
        ];
        for i in 0..circle.len() {
            for j in (i + 1)..circle.len() {
                for k in (j + 1)..circle.len() {
                    let (a, b, c) = (circle[i], circle[j], circle[k]);
                    if orient2d(a, b, c) <= 0.0 {
                        continue;
                    }
                    for &d in &circle {
                        assert_eq!(incircle(a, b, c, d), 0.0, "{a:?} {b:?} {c:?} {d:?}");
                    }
                }
            }
        }
    }
}
