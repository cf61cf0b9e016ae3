//! Minimal double-double arithmetic (unevaluated sum `hi + lo`), used where a
//! result must be correctly rounded despite catastrophic cancellation.

#[derive(Debug, Clone, Copy)]
pub(crate) struct Dd {
    pub hi: f64,
    pub lo: f64,
}

#[inline]
fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    let err = (a - (s - bb)) + (b - bb);
    (s, err)
}

#[inline]
fn quick_two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    (s, b - (s - a))
}

#[inline]
fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    (p, a.mul_add(b, -p))
}

impl Dd {
    pub const ZERO: Dd = Dd { hi: 0.0, lo: 0.0 };

    pub fn from_f64(x: f64) -> Self {
        Dd { hi: x, lo: 0.0 }
    }

    pub fn to_f64(self) -> f64 {
        self.hi + self.lo
    }

    pub fn add(self, o: Dd) -> Dd {
        let (s, e) = two_sum(self.hi, o.hi);
        let (t, f) = two_sum(self.lo, o.lo);
        let (s, e) = quick_two_sum(s, e + t);
        let (hi, lo) = quick_two_sum(s, e + f);
        Dd { hi, lo }
    }

    pub fn add_f64(self, b: f64) -> Dd {
        let (s, e) = two_sum(self.hi, b);
        let (hi, lo) = quick_two_sum(s, e + self.lo);
        Dd { hi, lo }
    }

    pub fn mul_f64(self, b: f64) -> Dd {
        let (p, e) = two_prod(self.hi, b);
        let (hi, lo) = quick_two_sum(p, e + self.lo * b);
        Dd { hi, lo }
    }

    pub fn div_f64(self, b: f64) -> Dd {
        let q1 = self.hi / b;
        // remainder self - q1*b, exactly up to the lo term
        let (p, e) = two_prod(q1, b);
        let r = ((self.hi - p) - e + self.lo) / b;
        let (hi, lo) = quick_two_sum(q1, r);
        Dd { hi, lo }
    }
}

/// `Σ_{k ≥ first} x^k / k!` in double-double, for `|x| ≤ 1`.
pub(crate) fn exp_tail(x: f64, first: u32) -> Dd {
    debug_assert!(x.abs() <= 1.0 && first >= 1);
    let mut term = Dd::from_f64(1.0);
    for k in 1..=first {
        term = term.mul_f64(x).div_f64(k as f64);
    }
    let mut sum = Dd::ZERO;
    let mut k = first;
    loop {
        sum = sum.add(term);
        if term.hi == 0.0 || term.hi.abs() < 1e-34 * sum.hi.abs() {
            return sum;
        }
        k += 1;
        term = term.mul_f64(x).div_f64(k as f64);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn expm1_matches_libm() {
        for &x in &[1e-3, -0.5, 0.25, -1.0, 1.0] {
            let dd = exp_tail(x, 1).to_f64();
            assert!((dd - libm::expm1(x)).abs() <= 2.0 * f64::EPSILON * dd.abs());
        }
    }

    #[test]
    fn recovers_low_part() {
        // 1 + 2^-80 is not representable in f64 but is in double-double.
        let tiny = 2f64.powi(-80);
        let s = Dd::from_f64(1.0).add_f64(tiny).add_f64(-1.0);
        assert_eq!(s.to_f64(), tiny);
    }
}
