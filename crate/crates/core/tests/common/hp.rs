//! 256-bit floating point for formula oracles.

use std::cell::RefCell;
use std::ops::{Add, Div, Mul, Neg, Sub};

use astro_float::{BigFloat, Consts, RoundingMode};

const P: usize = 256;
const RM: RoundingMode = RoundingMode::ToEven;

thread_local! {
    static CC: RefCell<Consts> = RefCell::new(Consts::new().expect("constants cache"));
}

#[derive(Clone, Debug)]
pub struct Hp(pub BigFloat);

pub fn hp(x: f64) -> Hp {
    Hp(BigFloat::from_f64(x, P))
}

pub fn int(n: i64) -> Hp {
    Hp(BigFloat::from_i64(n, P))
}

impl Hp {
    pub fn exp(&self) -> Hp {
        CC.with(|c| Hp(self.0.exp(P, RM, &mut c.borrow_mut())))
    }
    pub fn ln(&self) -> Hp {
        CC.with(|c| Hp(self.0.ln(P, RM, &mut c.borrow_mut())))
    }
    pub fn sqrt(&self) -> Hp {
        Hp(self.0.sqrt(P, RM))
    }
    pub fn powi(&self, n: usize) -> Hp {
        Hp(self.0.powi(n, P, RM))
    }
    pub fn abs(&self) -> Hp {
        Hp(self.0.abs())
    }
    pub fn floor(&self) -> Hp {
        Hp(self.0.floor())
    }
    pub fn is_positive(&self) -> bool {
        self.0.is_positive() && !self.0.is_zero()
    }
    pub fn lt(&self, o: &Hp) -> bool {
        matches!(self.0.cmp(&o.0), Some(c) if c < 0)
    }
    pub fn e() -> Hp {
        int(1).exp()
    }
    pub fn ln2() -> Hp {
        int(2).ln()
    }
    pub fn f64(&self) -> f64 {
        let s = format!("{}", self.0);
        s.parse::<f64>().unwrap_or_else(|_| panic!("unparsable {s}"))
    }
}

macro_rules! binop {
    ($tr:ident, $f:ident) => {
        impl $tr for Hp {
            type Output = Hp;
            fn $f(self, o: Hp) -> Hp {
                Hp(self.0.$f(&o.0, P, RM))
            }
        }
        impl $tr<&Hp> for &Hp {
            type Output = Hp;
            fn $f(self, o: &Hp) -> Hp {
                Hp(self.0.$f(&o.0, P, RM))
            }
        }
        impl $tr<f64> for Hp {
            type Output = Hp;
            fn $f(self, o: f64) -> Hp {
                Hp(self.0.$f(&BigFloat::from_f64(o, P), P, RM))
            }
        }
    };
}
binop!(Add, add);
binop!(Sub, sub);
binop!(Mul, mul);
binop!(Div, div);

impl Neg for Hp {
    type Output = Hp;
    fn neg(self) -> Hp {
        Hp(self.0.neg())
    }
}
