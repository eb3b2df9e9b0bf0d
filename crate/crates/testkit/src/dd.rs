//! Double-double arithmetic (~31 significant digits) for re-evaluating the
//! descent-condition formulas independently of the f64 implementation.
//! Error-free transforms follow Dekker/Knuth; good to a few ulps of the
//! 106-bit format, far beyond the 1e-12 comparisons it backs.

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Dd {
    pub hi: f64,
    pub lo: f64,
}

fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    let err = (a - (s - bb)) + (b - bb);
    (s, err)
}

fn quick_two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let err = b - (s - a);
    (s, err)
}

fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    let err = a.mul_add(b, -p);
    (p, err)
}

impl Dd {
    pub fn from(x: f64) -> Dd {
        Dd { hi: x, lo: 0.0 }
    }

    pub fn value(self) -> f64 {
        self.hi + self.lo
    }

    pub fn add(self, o: Dd) -> Dd {
        let (s1, s2) = two_sum(self.hi, o.hi);
        let (t1, t2) = two_sum(self.lo, o.lo);
        let (s1, s2) = quick_two_sum(s1, s2 + t1);
        let (hi, lo) = quick_two_sum(s1, s2 + t2);
        Dd { hi, lo }
    }

    pub fn neg(self) -> Dd {
        Dd { hi: -self.hi, lo: -self.lo }
    }

    pub fn sub(self, o: Dd) -> Dd {
        self.add(o.neg())
    }

    pub fn mul(self, o: Dd) -> Dd {
        let (p1, p2) = two_prod(self.hi, o.hi);
        let p2 = p2 + self.hi * o.lo + self.lo * o.hi;
        let (hi, lo) = quick_two_sum(p1, p2);
        Dd { hi, lo }
    }

    pub fn div(self, o: Dd) -> Dd {
        let q1 = self.hi / o.hi;
        let r = self.sub(o.mul(Dd::from(q1)));
        let q2 = r.hi / o.hi;
        let r = r.sub(o.mul(Dd::from(q2)));
        let q3 = r.hi / o.hi;
        let (s, e) = quick_two_sum(q1, q2);
        let (hi, lo) = quick_two_sum(s, e + q3);
        Dd { hi, lo }
    }

    pub fn recip(self) -> Dd {
        Dd::from(1.0).div(self)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn catches_f64_cancellation() {
        // (1 + 1e-17) - 1 is 0.0 in f64 but representable in dd.
        let a = Dd::from(1.0).add(Dd::from(1e-17));
        let b = a.sub(Dd::from(1.0));
        assert!((b.value() - 1e-17).abs() < 1e-30);
    }

    #[test]
    fn division_is_accurate() {
        let x = Dd::from(1.0).div(Dd::from(3.0));
        let back = x.mul(Dd::from(3.0));
        assert!((back.value() - 1.0).abs() < 1e-30);
        assert!(back.sub(Dd::from(1.0)).hi.abs() < 1e-30);
    }
}
