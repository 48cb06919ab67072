//! Negative fundamental discriminants and their Kronecker characters.

use std::fmt;
use std::sync::Arc;

use serde::{Serialize, Serializer};

use crate::error::{Error, Result};

/// Characters with period up to this size carry a precomputed value table.
pub const TABLE_LIMIT: u64 = 1_000_000;

/// A validated negative fundamental discriminant `-D`.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FundamentalDiscriminant {
    neg_d: i64,
}

impl FundamentalDiscriminant {
    pub fn new(n: i64) -> Result<Self> {
        if is_fundamental(n) {
            Ok(FundamentalDiscriminant { neg_d: n })
        } else {
            Err(Error::NotFundamental(n))
        }
    }

    /// The discriminant itself, `-D < 0`.
    pub fn neg_d(self) -> i64 {
        self.neg_d
    }

    /// Its magnitude `D`.
    pub fn d(self) -> u64 {
        self.neg_d.unsigned_abs()
    }

    pub fn character(self) -> KroneckerCharacter {
        KroneckerCharacter::new(self)
    }
}

impl fmt::Display for FundamentalDiscriminant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.neg_d)
    }
}

impl Serialize for FundamentalDiscriminant {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_i64(self.neg_d)
    }
}

fn is_squarefree(n: u64) -> bool {
    if n == 0 {
        return false;
    }
    let mut m = n;
    let mut p = 2u64;
    // Strip all primes up to the cube root; what remains has at most two
    // prime factors, so it is squarefree unless it is a perfect square.
    while p.saturating_mul(p).saturating_mul(p) <= n {
        if m % p == 0 {
            m /= p;
            if m % p == 0 {
                return false;
            }
        }
        p += if p == 2 { 1 } else { 2 };
    }
    if m > 1 {
        let r = m.isqrt();
        if r * r == m {
            return false;
        }
    }
    true
}

/// True iff `n` is a negative fundamental discriminant.
pub fn is_fundamental(n: i64) -> bool {
    if n > -3 {
        return false;
    }
    let d = n.unsigned_abs();
    match n.rem_euclid(4) {
        1 => is_squarefree(d),
        0 => {
            let m = n / 4;
            matches!(m.rem_euclid(4), 2 | 3) && is_squarefree(m.unsigned_abs())
        }
        _ => false,
    }
}

/// All fundamental discriminants in `[lo, hi]`, ordered by increasing `D`.
pub fn enumerate_fundamental(lo: i64, hi: i64) -> Result<Vec<FundamentalDiscriminant>> {
    if hi >= 0 || lo >= 0 {
        return Err(Error::InvalidRange { lo, hi });
    }
    if lo > hi {
        return Ok(Vec::new());
    }
    Ok((lo..=hi)
        .rev()
        .filter(|&n| is_fundamental(n))
        .map(|neg_d| FundamentalDiscriminant { neg_d })
        .collect())
}

/// Jacobi symbol `(a/n)` for odd `n > 0`.
fn jacobi(a: u64, n: u64) -> i8 {
    debug_assert!(n % 2 == 1);
    let mut a = a % n;
    let mut n = n;
    let mut s = 1i8;
    while a != 0 {
        let tz = a.trailing_zeros();
        a >>= tz;
        if tz % 2 == 1 && matches!(n % 8, 3 | 5) {
            s = -s;
        }
        if a % 4 == 3 && n % 4 == 3 {
            s = -s;
        }
        std::mem::swap(&mut a, &mut n);
        a %= n;
    }
    if n == 1 {
        s
    } else {
        0
    }
}

/// Kronecker symbol `(a/n)` for `n >= 0`.
pub fn kronecker(a: i64, n: u64) -> i8 {
    if n == 0 {
        return if a.abs() == 1 { 1 } else { 0 };
    }
    let v = n.trailing_zeros();
    let odd = n >> v;
    let two = match a.rem_euclid(8) {
        1 | 7 => 1,
        3 | 5 => -1,
        _ => 0,
    };
    let mut s: i8 = if v == 0 {
        1
    } else if v % 2 == 0 {
        (two * two) as i8
    } else {
        two as i8
    };
    if s == 0 {
        return 0;
    }
    s *= jacobi(a.rem_euclid(odd as i64) as u64, odd);
    s
}

/// The real character `n ↦ (-D/n)`.
#[derive(Clone, Debug)]
pub struct KroneckerCharacter {
    disc: FundamentalDiscriminant,
    table: Option<Arc<[i8]>>,
}

impl KroneckerCharacter {
    pub fn new(disc: FundamentalDiscriminant) -> Self {
        let d = disc.d();
        let table = (d <= TABLE_LIMIT)
            .then(|| (0..d).map(|n| kronecker(disc.neg_d(), n)).collect::<Arc<[i8]>>());
        KroneckerCharacter { disc, table }
    }

    /// A character that always computes symbols directly.
    pub fn without_table(disc: FundamentalDiscriminant) -> Self {
        KroneckerCharacter { disc, table: None }
    }

    pub fn disc(&self) -> FundamentalDiscriminant {
        self.disc
    }

    pub fn period(&self) -> u64 {
        self.disc.d()
    }

    pub fn has_table(&self) -> bool {
        self.table.is_some()
    }

    pub fn chi(&self, n: u64) -> i8 {
        if n == 0 {
            return 0;
        }
        match &self.table {
            Some(t) => t[(n % self.period()) as usize],
            None => kronecker(self.disc.neg_d(), n),
        }
    }
}

/// `χ(n)` for the character `c`.
pub fn chi(c: &KroneckerCharacter, n: u64) -> i8 {
    c.chi(n)
}

#[cfg(test)]
mod tests {
    use super::*;

    // Discriminant of Q(sqrt(m)) for squarefree m < 0, by brute force.
    fn field_discriminants(limit: i64) -> Vec<i64> {
        let squarefree = |m: i64| (2..=m.abs()).all(|k| m.abs() % (k * k) != 0);
        let mut out: Vec<i64> = (1..=limit)
            .map(|k| -k)
            .filter(|&m| squarefree(m))
            .map(|m| if m.rem_euclid(4) == 1 { m } else { 4 * m })
            .filter(|&d| d >= -limit)
            .collect();
        out.sort_unstable_by(|a, b| b.cmp(a));
        out
    }

    #[test]
    fn known_values() {
        assert!(is_fundamental(-163));
        assert!(is_fundamental(-3));
        assert!(is_fundamental(-4));
        assert!(is_fundamental(-8));
        assert!(!is_fundamental(-12));
        assert!(!is_fundamental(-10));
        assert!(!is_fundamental(-1));
        assert!(!is_fundamental(0));
        assert!(!is_fundamental(5));
        assert!(is_fundamental(-175990483));
    }

    #[test]
    fn matches_quadratic_field_oracle() {
        let want = field_discriminants(3000);
        let got: Vec<i64> = enumerate_fundamental(-3000, -1)
            .unwrap()
            .iter()
            .map(|d| d.neg_d())
            .collect();
        assert_eq!(got, want);
    }

    #[test]
    fn small_ranges() {
        let v: Vec<i64> = enumerate_fundamental(-10, -3)
            .unwrap()
            .iter()
            .map(|d| d.neg_d())
            .collect();
        assert_eq!(v, vec![-3, -4, -7, -8]);
        assert_eq!(enumerate_fundamental(-3, -3).unwrap().len(), 1);
        assert!(enumerate_fundamental(-3, -10).unwrap().is_empty());
        assert!(enumerate_fundamental(-3, 0).is_err());
    }

    #[test]
    fn character_values() {
        let c = FundamentalDiscriminant::new(-163).unwrap().character();
        assert_eq!(c.chi(1), 1);
        assert_eq!(c.chi(0), 0);
        assert_eq!(c.chi(163), 0);
        assert_eq!(c.chi(2), -1);
        // Euler's criterion for odd primes p: (-163/p) = (-163)^((p-1)/2) mod p.
        for p in [3u64, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41] {
            let a = (-163i64).rem_euclid(p as i64) as u64;
            let mut e = 1u64;
            for _ in 0..(p - 1) / 2 {
                e = e * a % p;
            }
            let want = if e == 1 { 1 } else { -1 };
            assert_eq!(c.chi(p), want, "p = {p}");
        }
    }

    #[test]
    fn table_agrees_with_direct() {
        for n in [-3, -4, -8, -163, -1411, -17923] {
            let d = FundamentalDiscriminant::new(n).unwrap();
            let t = KroneckerCharacter::new(d);
            let direct = KroneckerCharacter::without_table(d);
            assert!(t.has_table());
            for k in 0..5000 {
                assert_eq!(t.chi(k), direct.chi(k), "-D = {n}, k = {k}");
            }
        }
    }

    #[test]
    fn squarefree_handles_cofactor_squares() {
        assert!(!is_squarefree(49));
        assert!(!is_squarefree(101 * 101 * 3));
        assert!(!is_squarefree(10007 * 10007));
        assert!(is_squarefree(10007 * 10009));
        assert!(is_squarefree(1));
    }
}
