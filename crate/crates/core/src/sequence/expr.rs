//! Exact symbolic expressions for pulse angles and delays.
//!
//! An expression is kept in canonical form: a sum of monomials
//! `c · π^p · J^q · Π sym^k` with exact rational coefficients, like terms
//! merged and zero terms dropped. Two expressions that denote the same
//! Laurent polynomial compare equal, which makes printing and re-parsing a
//! structural identity.

use std::collections::{BTreeMap, HashMap};
use std::f64::consts::PI;
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

const MAX_TERMS: usize = 256;

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
struct Monomial {
    symbols: BTreeMap<String, i32>,
    pi: i32,
    j: i32,
}

impl Monomial {
    fn mul(&self, rhs: &Monomial, sign: i32) -> Option<Monomial> {
        let mut out = self.clone();
        out.pi = out.pi.checked_add(rhs.pi.checked_mul(sign)?)?;
        out.j = out.j.checked_add(rhs.j.checked_mul(sign)?)?;
        for (name, k) in &rhs.symbols {
            let e = out.symbols.entry(name.clone()).or_insert(0);
            *e = e.checked_add(k.checked_mul(sign)?)?;
            if *e == 0 {
                out.symbols.remove(name);
            }
        }
        Some(out)
    }

    fn is_constant(&self) -> bool {
        self.symbols.is_empty() && self.pi == 0 && self.j == 0
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct Expr {
    terms: BTreeMap<Monomial, BigRational>,
}

impl Expr {
    pub fn zero() -> Self {
        Expr::default()
    }

    pub fn rational(value: BigRational) -> Self {
        Expr::single(Monomial::default(), value)
    }

    pub fn integer(n: i64) -> Self {
        Expr::rational(BigRational::from_integer(BigInt::from(n)))
    }

    /// Exact value of a decimal literal such as `2.5e-3`.
    pub fn decimal(lexeme: &str) -> Option<Self> {
        let (mantissa, exp) = match lexeme.find(['e', 'E']) {
            Some(k) => (&lexeme[..k], lexeme[k + 1..].parse::<i64>().ok()?),
            None => (lexeme, 0),
        };
        let (int_part, frac_part) = mantissa.split_once('.').unwrap_or((mantissa, ""));
        let digits = format!("{int_part}{frac_part}");
        if digits.is_empty() {
            return None;
        }
        let n = BigInt::parse_bytes(digits.as_bytes(), 10)?;
        let shift = exp - frac_part.len() as i64;
        if shift.abs() > 64 {
            return None;
        }
        let pow = BigInt::from(10).pow(shift.unsigned_abs() as u32);
        let value = if shift >= 0 { BigRational::from_integer(n * pow) } else { BigRational::new(n, pow) };
        Some(Expr::rational(value))
    }

    pub fn pi() -> Self {
        Expr::single(Monomial { pi: 1, ..Default::default() }, BigRational::one())
    }

    pub fn j() -> Self {
        Expr::single(Monomial { j: 1, ..Default::default() }, BigRational::one())
    }

    pub fn symbol(name: &str) -> Self {
        let mut symbols = BTreeMap::new();
        symbols.insert(name.to_string(), 1);
        Expr::single(Monomial { symbols, ..Default::default() }, BigRational::one())
    }

    /// `num/den · π`.
    pub fn pi_fraction(num: i64, den: i64) -> Self {
        Expr::single(Monomial { pi: 1, ..Default::default() }, BigRational::new(BigInt::from(num), BigInt::from(den)))
    }

    fn single(m: Monomial, c: BigRational) -> Self {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(m, c);
        }
        Expr { terms }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn neg(&self) -> Self {
        Expr { terms: self.terms.iter().map(|(m, c)| (m.clone(), -c.clone())).collect() }
    }

    pub fn add(&self, rhs: &Expr) -> Self {
        let mut terms = self.terms.clone();
        for (m, c) in &rhs.terms {
            let entry = terms.entry(m.clone()).or_insert_with(BigRational::zero);
            *entry += c;
            if entry.is_zero() {
                terms.remove(m);
            }
        }
        Expr { terms }
    }

    pub fn sub(&self, rhs: &Expr) -> Self {
        self.add(&rhs.neg())
    }

    pub fn mul(&self, rhs: &Expr) -> Result<Self> {
        if self.terms.len() * rhs.terms.len() > MAX_TERMS {
            return Err(Error::InvalidExpression(format!("expression expands to more than {MAX_TERMS} terms")));
        }
        let mut out = Expr::zero();
        for (ma, ca) in &self.terms {
            for (mb, cb) in &rhs.terms {
                let m = ma.mul(mb, 1).ok_or_else(|| Error::InvalidExpression("exponent overflow".into()))?;
                out = out.add(&Expr::single(m, ca * cb));
            }
        }
        Ok(out)
    }

    /// Division is limited to single-term divisors so results stay
    /// polynomial.
    pub fn div(&self, rhs: &Expr) -> Result<Self> {
        if rhs.terms.is_empty() {
            return Err(Error::InvalidExpression("division by zero".into()));
        }
        if rhs.terms.len() > 1 {
            return Err(Error::InvalidExpression("division by a sum is not supported".into()));
        }
        let (mb, cb) = rhs.terms.iter().next().expect("one term");
        let mut out = Expr::zero();
        for (ma, ca) in &self.terms {
            let m = ma.mul(mb, -1).ok_or_else(|| Error::InvalidExpression("exponent overflow".into()))?;
            out = out.add(&Expr::single(m, ca / cb));
        }
        Ok(out)
    }

    pub fn depends_on_j(&self) -> bool {
        self.terms.keys().any(|m| m.j != 0)
    }

    pub fn free_symbols(&self) -> Vec<String> {
        let mut names: Vec<String> = self.terms.keys().flat_map(|m| m.symbols.keys().cloned()).collect();
        names.sort();
        names.dedup();
        names
    }

    /// Numeric value with `J` in Hz and symbols taken from `bindings`.
    pub fn eval(&self, j_hz: f64, bindings: &HashMap<String, f64>) -> Result<f64> {
        let mut total = 0.0;
        for (m, c) in &self.terms {
            let mut v = c.to_f64().ok_or_else(|| Error::InvalidExpression("coefficient out of range".into()))?;
            v *= PI.powi(m.pi) * j_hz.powi(m.j);
            for (name, k) in &m.symbols {
                let x = bindings.get(name).ok_or_else(|| Error::UnboundSymbol(name.clone()))?;
                v *= x.powi(*k);
            }
            total += v;
        }
        if !total.is_finite() {
            return Err(Error::InvalidExpression("expression evaluates to a non-finite value".into()));
        }
        Ok(total)
    }
}

fn push_factors(out: &mut Vec<String>, name: &str, power: i32) {
    for _ in 0..power.unsigned_abs() {
        out.push(name.to_string());
    }
}

/// Numbers may be glued to `pi` and `J`; user symbols get an explicit `*`
/// so names like `e5` cannot merge into an exponent.
fn juxtapose(first: &str) -> &'static str {
    if first == "pi" || first == "J" {
        ""
    } else {
        "*"
    }
}

fn write_term(f: &mut fmt::Formatter<'_>, m: &Monomial, c: &BigRational) -> fmt::Result {
    let mut num = Vec::new();
    let mut den = Vec::new();
    for (name, k) in &m.symbols {
        push_factors(if *k > 0 { &mut num } else { &mut den }, name, *k);
    }
    push_factors(if m.pi > 0 { &mut num } else { &mut den }, "pi", m.pi);
    push_factors(if m.j > 0 { &mut num } else { &mut den }, "J", m.j);

    let p = c.numer().abs();
    let q = c.denom().clone();
    let num_str = match (p.is_one(), num.is_empty()) {
        (_, true) => p.to_string(),
        (true, false) => num.join("*"),
        (false, false) => format!("{p}{}{}", juxtapose(&num[0]), num.join("*")),
    };
    f.write_str(&num_str)?;
    let mut den_parts = Vec::new();
    if !q.is_one() {
        den_parts.push(q.to_string());
    }
    let den_str = if den.is_empty() {
        den_parts.join("")
    } else if den_parts.is_empty() {
        den.join("*")
    } else {
        format!("{}{}{}", den_parts[0], juxtapose(&den[0]), den.join("*"))
    };
    if !den_str.is_empty() {
        let wrap = den.len() + den_parts.len() > 1;
        if wrap {
            write!(f, "/({den_str})")?;
        } else {
            write!(f, "/{den_str}")?;
        }
    }
    Ok(())
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        // constants first keeps "pi - theta" style output readable
        let mut ordered: Vec<_> = self.terms.iter().collect();
        ordered.sort_by_key(|(m, _)| !m.is_constant());
        for (i, (m, c)) in ordered.into_iter().enumerate() {
            let negative = c.is_negative();
            match (i, negative) {
                (0, true) => f.write_str("-")?,
                (0, false) => {}
                (_, true) => f.write_str(" - ")?,
                (_, false) => f.write_str(" + ")?,
            }
            write_term(f, m, c)?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn canonical_forms_merge() {
        let a = Expr::pi().mul(&Expr::integer(3)).unwrap().div(&Expr::integer(2)).unwrap();
        assert_eq!(a, Expr::pi_fraction(3, 2));
        assert_eq!(a.to_string(), "3pi/2");
        let t = Expr::symbol("theta");
        assert!(t.sub(&t).is_zero());
        assert_eq!(Expr::pi().sub(&t).to_string(), "pi - theta");
    }

    #[test]
    fn j_fractions_print_with_parentheses() {
        let e = Expr::integer(1).div(&Expr::integer(8).mul(&Expr::j()).unwrap()).unwrap();
        assert_eq!(e.to_string(), "1/(8J)");
        assert!(e.depends_on_j());
        let v = e.eval(214.5, &HashMap::new()).unwrap();
        assert!((v - 1.0 / (8.0 * 214.5)).abs() < 1e-18);
    }

    #[test]
    fn decimals_are_exact() {
        let e = Expr::decimal("2.5e-3").unwrap();
        assert_eq!(e, Expr::rational(BigRational::new(BigInt::from(1), BigInt::from(400))));
        assert!(Expr::decimal("1e999").is_none());
    }

    #[test]
    fn division_rules() {
        let sum = Expr::pi().add(&Expr::integer(1));
        assert!(Expr::integer(1).div(&sum).is_err());
        assert!(Expr::integer(1).div(&Expr::zero()).is_err());
    }

    #[test]
    fn unbound_symbols_are_reported() {
        let e = Expr::symbol("theta");
        assert!(matches!(e.eval(1.0, &HashMap::new()), Err(Error::UnboundSymbol(s)) if s == "theta"));
        assert_eq!(e.free_symbols(), vec!["theta".to_string()]);
    }
}
