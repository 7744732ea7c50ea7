use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;

use crate::circuit::CpeDag;
use crate::field::MODULUS;

/// Upper bound `4 n |phi| / p` on the probability that the verifier accepts
/// a wrong count.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SoundnessBound {
    pub n: u64,
    pub size: u64,
    pub value: BigRational,
}

pub fn soundness_bound(n: u64, size: u64) -> SoundnessBound {
    let num = BigInt::from(4u32) * BigInt::from(n) * BigInt::from(size);
    SoundnessBound { n, size, value: BigRational::new(num, BigInt::from(MODULUS)) }
}

/// The bound for a circuit, with `n` the number of variables occurring in it
/// and `|phi|` its reachable node count.
pub fn dag_soundness_bound(dag: &CpeDag) -> SoundnessBound {
    soundness_bound(dag.occurring_vars().len() as u64, dag.size() as u64)
}

impl SoundnessBound {
    pub fn is_zero(&self) -> bool {
        self.value.is_zero()
    }

    /// `log10` of the bound; negative infinity when it is zero.
    pub fn log10(&self) -> f64 {
        if self.is_zero() {
            return f64::NEG_INFINITY;
        }
        // The numerator stays far below 2^53 for any realistic instance, but
        // take logs of the factors to be safe.
        4f64.log10() + (self.n as f64).log10() + (self.size as f64).log10() - (MODULUS as f64).log10()
    }

    /// Scientific notation with three significant digits, e.g. `1.73e-10`.
    pub fn to_decimal_string(&self) -> String {
        if self.is_zero() {
            return "0".to_string();
        }
        let l = self.log10();
        let mut exp = l.floor();
        let mut mant = 10f64.powf(l - exp);
        if format!("{mant:.2}") == "10.00" {
            mant /= 10.0;
            exp += 1.0;
        }
        format!("{mant:.2}e{}", exp as i64)
    }
}

impl fmt::Display for SoundnessBound {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} ({})", self.value, self.to_decimal_string())
    }
}
