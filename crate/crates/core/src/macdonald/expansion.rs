use std::collections::BTreeMap;
use std::fmt;

use rug::Rational;
use serde_json::{json, Value};

use super::operators::{apply_macdonald_operator, eigenvalue_vector, monomial_sym};
use super::{MacdonaldError, QTPoint};
use crate::exact::{dominance_leq, format_rational, parse_rational, partitions_of_weight, rational_pow, ExactError, MultiPoly, Partition};

/// A symmetric polynomial expanded in the monomial symmetric functions `m_μ`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SymmetricPoly {
    n: usize,
    coeffs: BTreeMap<Partition, Rational>,
}

impl SymmetricPoly {
    pub fn zero(n: usize) -> Self {
        Self { n, coeffs: BTreeMap::new() }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn coeffs(&self) -> &BTreeMap<Partition, Rational> {
        &self.coeffs
    }

    pub fn coeff(&self, mu: &Partition) -> Rational {
        self.coeffs.get(mu).cloned().unwrap_or_default()
    }

    pub fn add_term(&mut self, mu: Partition, c: Rational) -> Result<(), MacdonaldError> {
        if mu.len() > self.n {
            return Err(ExactError::LengthExceedsVariables { length: mu.len(), n: self.n }.into());
        }
        let entry = self.coeffs.entry(mu.clone()).or_default();
        *entry += c;
        if *entry == 0 {
            self.coeffs.remove(&mu);
        }
        Ok(())
    }

    pub fn to_multipoly(&self) -> Result<MultiPoly, MacdonaldError> {
        let mut out = MultiPoly::zero_in(self.n);
        for (mu, c) in &self.coeffs {
            out = &out + &monomial_sym(mu, self.n)?.scale(c);
        }
        Ok(out)
    }

    /// Reads off the `m_μ` coefficients of `f`, failing unless every
    /// permutation of each exponent vector carries the same coefficient.
    pub fn from_multipoly(f: &MultiPoly) -> Result<Self, MacdonaldError> {
        let mut out = Self::zero(f.nvars());
        for (exps, c) in f.terms() {
            if exps.iter().any(|&e| e < 0) {
                return Err(MacdonaldError::NotSymmetric);
            }
            let mut sorted: Vec<i32> = exps.to_vec();
            sorted.sort_unstable_by(|a, b| b.cmp(a));
            if sorted.as_slice() == exps {
                let mu = Partition::new(sorted.iter().map(|&e| e as u32).collect::<Vec<_>>())?;
                out.coeffs.insert(mu, c.clone());
            } else if f.coeff(&sorted) != *c {
                return Err(MacdonaldError::NotSymmetric);
            }
        }
        Ok(out)
    }
}

/// `P_λ = m_λ + Σ_{μ<λ} u_{λμ} m_μ`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MacdonaldExpansion {
    pub lambda: Partition,
    pub n: usize,
    pub qt: QTPoint,
    pub u: BTreeMap<Partition, Rational>,
}

impl MacdonaldExpansion {
    pub fn to_symmetric(&self) -> SymmetricPoly {
        let mut coeffs = self.u.clone();
        coeffs.insert(self.lambda.clone(), Rational::from(1));
        SymmetricPoly { n: self.n, coeffs }
    }

    pub fn to_multipoly(&self) -> Result<MultiPoly, MacdonaldError> {
        self.to_symmetric().to_multipoly()
    }

    pub fn to_json(&self) -> Value {
        let u: Vec<Value> = self
            .u
            .iter()
            .map(|(mu, c)| json!({ "mu": mu.parts(), "coeff": format_rational(c) }))
            .collect();
        json!({
            "lambda": self.lambda.parts(),
            "n": self.n,
            "q": format_rational(&self.qt.q),
            "t": format_rational(&self.qt.t),
            "u": u,
        })
    }
}

/// Builds `P_λ` in `n` variables by solving the first-operator eigen-relation
/// over the dominance-lower cone, then checks every operator `D_n^r`.
pub fn macdonald_polynomial(lambda: &Partition, n: usize, qt: &QTPoint) -> Result<MacdonaldExpansion, MacdonaldError> {
    lambda.padded(n)?;
    let lower: Vec<Partition> = partitions_of_weight(lambda.weight(), n)
        .into_iter()
        .filter(|mu| mu != lambda && dominance_leq(mu, lambda))
        .collect();

    let act = |mu: &Partition| -> Result<SymmetricPoly, MacdonaldError> {
        SymmetricPoly::from_multipoly(&apply_macdonald_operator(1, &monomial_sym(mu, n)?, qt)?)
    };
    let top_image = act(lambda)?;
    let lower_images = lower.iter().map(act).collect::<Result<Vec<_>, _>>()?;
    let eigen = eigenvalue_vector(lambda, n, qt)?;

    // reverse-lex order refines dominance, so only earlier unknowns feed each row
    let mut u: BTreeMap<Partition, Rational> = BTreeMap::new();
    for (k, kappa) in lower.iter().enumerate() {
        let mut rhs = top_image.coeff(kappa);
        for (mu, image) in lower[..k].iter().zip(&lower_images) {
            if let Some(u_mu) = u.get(mu) {
                rhs += Rational::from(u_mu * &image.coeff(kappa));
            }
        }
        let diag = Rational::from(eigen.get(1) - &lower_images[k].coeff(kappa));
        if diag == 0 {
            return Err(MacdonaldError::SingularSystem { lambda: lambda.clone(), mu: kappa.clone() });
        }
        let value = rhs / diag;
        if value != 0 {
            u.insert(kappa.clone(), value);
        }
    }

    let expansion = MacdonaldExpansion { lambda: lambda.clone(), n, qt: qt.clone(), u };
    let p = expansion.to_multipoly()?;
    for r in 0..=n {
        if apply_macdonald_operator(r, &p, qt)? != p.scale(eigen.get(r)) {
            return Err(MacdonaldError::PostconditionFailed { r });
        }
    }
    Ok(expansion)
}

/// A polynomial in two variables, `Σ c_{ij} z₁ⁱ z₂ʲ`.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct TwoVarPoly {
    coeffs: BTreeMap<(u32, u32), Rational>,
}

impl TwoVarPoly {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn from_terms(terms: impl IntoIterator<Item = ((u32, u32), Rational)>) -> Self {
        let mut out = Self::zero();
        for (ij, c) in terms {
            out.add_term(ij, c);
        }
        out
    }

    /// `z₁ᵐ + z₂ᵐ`.
    pub fn power_sum(m: u32) -> Self {
        Self::from_terms([((m, 0), Rational::from(1)), ((0, m), Rational::from(1))])
    }

    pub fn add_term(&mut self, ij: (u32, u32), c: Rational) {
        let entry = self.coeffs.entry(ij).or_default();
        *entry += c;
        if *entry == 0 {
            self.coeffs.remove(&ij);
        }
    }

    pub fn coeff(&self, i: u32, j: u32) -> Rational {
        self.coeffs.get(&(i, j)).cloned().unwrap_or_default()
    }

    pub fn terms(&self) -> impl Iterator<Item = ((u32, u32), &Rational)> {
        self.coeffs.iter().map(|(&ij, c)| (ij, c))
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn total_degree(&self) -> Option<u32> {
        self.coeffs.keys().map(|&(i, j)| i + j).max()
    }

    pub fn eval(&self, z1: &Rational, z2: &Rational) -> Rational {
        let mut acc = Rational::new();
        for (&(i, j), c) in &self.coeffs {
            acc += Rational::from(c * &rational_pow(z1, i as i32)) * rational_pow(z2, j as i32);
        }
        acc
    }

    fn mul(&self, other: &Self) -> Self {
        let mut out = Self::zero();
        for (&(i, j), a) in &self.coeffs {
            for (&(k, l), b) in &other.coeffs {
                out.add_term((i + k, j + l), Rational::from(a * b));
            }
        }
        out
    }

    fn add(&self, other: &Self, sign: i32) -> Self {
        let mut out = self.clone();
        for (&ij, c) in &other.coeffs {
            out.add_term(ij, Rational::from(c * sign));
        }
        out
    }

    /// Parses expressions such as `"y1^2 + 3/2*y1*y2 - (y2 - 1)^3"`.
    /// Variables may be spelled `z1, z2`, `y1, y2` or `x1, x2`.
    pub fn parse(s: &str) -> Result<Self, ExactError> {
        let tokens = tokenize(s)?;
        let mut parser = Parser { tokens: &tokens, pos: 0 };
        let out = parser.expr()?;
        if parser.pos != tokens.len() {
            return Err(ExactError::Parse(format!("unexpected trailing input in {s:?}")));
        }
        Ok(out)
    }
}

impl fmt::Display for TwoVarPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.coeffs.is_empty() {
            return f.write_str("0");
        }
        let mut first = true;
        for (&(i, j), c) in self.coeffs.iter().rev() {
            let mut factors = Vec::new();
            for (name, e) in [("z1", i), ("z2", j)] {
                match e {
                    0 => {}
                    1 => factors.push(name.to_string()),
                    _ => factors.push(format!("{name}^{e}")),
                }
            }
            let negative = *c < 0;
            let magnitude = Rational::from(c.abs_ref());
            let body = match (factors.is_empty(), magnitude == 1) {
                (true, _) => magnitude.to_string(),
                (false, true) => factors.join("*"),
                (false, false) => format!("{}*{}", magnitude, factors.join("*")),
            };
            match (first, negative) {
                (true, true) => write!(f, "-{body}")?,
                (true, false) => write!(f, "{body}")?,
                (false, true) => write!(f, " - {body}")?,
                (false, false) => write!(f, " + {body}")?,
            }
            first = false;
        }
        Ok(())
    }
}

/// `p_λ(z₁, z₂)` with `P_λ(z₁v, z₂v, v) = v^{|λ|} p_λ(z₁, z₂)`.
pub fn dehomogenize(p: &MacdonaldExpansion) -> Result<TwoVarPoly, MacdonaldError> {
    if p.n != 3 {
        return Err(MacdonaldError::WrongVariableCount(p.n));
    }
    let full = p.to_multipoly()?;
    Ok(TwoVarPoly::from_terms(
        full.terms().map(|(e, c)| ((e[0] as u32, e[1] as u32), c.clone())),
    ))
}

#[derive(Clone, Debug, PartialEq)]
enum Token {
    Num(Rational),
    Var(usize),
    Op(char),
}

fn tokenize(s: &str) -> Result<Vec<Token>, ExactError> {
    let chars: Vec<char> = s.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        if c.is_whitespace() {
            i += 1;
        } else if "+-*/^()".contains(c) {
            out.push(Token::Op(c));
            i += 1;
        } else if c.is_ascii_digit() || c == '.' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_digit() || chars[i] == '.') {
                i += 1;
            }
            let text: String = chars[start..i].iter().collect();
            out.push(Token::Num(parse_rational(&text)?));
        } else if matches!(c, 'x' | 'y' | 'z') && i + 1 < chars.len() && matches!(chars[i + 1], '1' | '2') {
            out.push(Token::Var(if chars[i + 1] == '1' { 0 } else { 1 }));
            i += 2;
        } else {
            return Err(ExactError::Parse(format!("unexpected character {c:?} in {s:?}")));
        }
    }
    Ok(out)
}

struct Parser<'a> {
    tokens: &'a [Token],
    pos: usize,
}

impl Parser<'_> {
    fn peek_op(&self) -> Option<char> {
        match self.tokens.get(self.pos) {
            Some(Token::Op(c)) => Some(*c),
            _ => None,
        }
    }

    fn expr(&mut self) -> Result<TwoVarPoly, ExactError> {
        let mut acc = match self.peek_op() {
            Some('-') => {
                self.pos += 1;
                TwoVarPoly::zero().add(&self.term()?, -1)
            }
            Some('+') => {
                self.pos += 1;
                self.term()?
            }
            _ => self.term()?,
        };
        while let Some(op @ ('+' | '-')) = self.peek_op() {
            self.pos += 1;
            let rhs = self.term()?;
            acc = acc.add(&rhs, if op == '+' { 1 } else { -1 });
        }
        Ok(acc)
    }

    fn term(&mut self) -> Result<TwoVarPoly, ExactError> {
        let mut acc = self.power()?;
        while let Some(op @ ('*' | '/')) = self.peek_op() {
            self.pos += 1;
            let rhs = self.power()?;
            acc = if op == '*' {
                acc.mul(&rhs)
            } else {
                let divisor = match (rhs.total_degree(), rhs.coeffs.get(&(0, 0))) {
                    (Some(0), Some(c)) => c.clone(),
                    _ => return Err(ExactError::Parse("can only divide by a nonzero constant".into())),
                };
                acc.mul(&TwoVarPoly::from_terms([((0, 0), divisor.recip())]))
            };
        }
        Ok(acc)
    }

    fn power(&mut self) -> Result<TwoVarPoly, ExactError> {
        let base = self.atom()?;
        if self.peek_op() != Some('^') {
            return Ok(base);
        }
        self.pos += 1;
        let exponent = match self.tokens.get(self.pos) {
            Some(Token::Num(e)) if e.denom() == &1 && *e >= 0 => e.numer().to_u32().unwrap_or(u32::MAX),
            _ => return Err(ExactError::Parse("exponent must be a non-negative integer".into())),
        };
        self.pos += 1;
        let mut out = TwoVarPoly::from_terms([((0, 0), Rational::from(1))]);
        for _ in 0..exponent {
            out = out.mul(&base);
        }
        Ok(out)
    }

    fn atom(&mut self) -> Result<TwoVarPoly, ExactError> {
        let token = self.tokens.get(self.pos).cloned();
        self.pos += 1;
        match token {
            Some(Token::Num(c)) => Ok(TwoVarPoly::from_terms([((0, 0), c)])),
            Some(Token::Var(0)) => Ok(TwoVarPoly::from_terms([((1, 0), Rational::from(1))])),
            Some(Token::Var(_)) => Ok(TwoVarPoly::from_terms([((0, 1), Rational::from(1))])),
            Some(Token::Op('(')) => {
                let inner = self.expr()?;
                if self.peek_op() != Some(')') {
                    return Err(ExactError::Parse("missing closing parenthesis".into()));
                }
                self.pos += 1;
                Ok(inner)
            }
            Some(Token::Op('-')) => Ok(TwoVarPoly::zero().add(&self.power()?, -1)),
            _ => Err(ExactError::Parse("expected a number, variable or '('".into())),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::partitions_up_to;
    use proptest::prelude::*;

    fn p(s: &str) -> Partition {
        s.parse().unwrap()
    }

    fn qt(q: (i64, i64), t: (i64, i64)) -> QTPoint {
        QTPoint::new(Rational::from(q), Rational::from(t)).unwrap()
    }

    fn standard() -> QTPoint {
        qt((1, 2), (10, 1))
    }

    #[test]
    fn small_examples() {
        let qt = standard();
        assert!(macdonald_polynomial(&p("1"), 3, &qt).unwrap().u.is_empty());
        assert!(macdonald_polynomial(&p("1,1"), 3, &qt).unwrap().u.is_empty());
        let p2 = macdonald_polynomial(&p("2"), 3, &qt).unwrap();
        assert_eq!(p2.u.len(), 1);
        assert_eq!(p2.u[&p("1,1")], Rational::from((27, 8)));
    }

    #[test]
    fn two_box_coefficient_matches_closed_form() {
        for qt in [standard(), qt((2, 3), (3, 1)), qt((-1, 3), (5, 2)), qt((3, 1), (7, 1))] {
            let (q, t) = (&qt.q, &qt.t);
            let one = Rational::from(1);
            let expected = Rational::from(&one + q) * Rational::from(&one - t) / (&one - Rational::from(q * t));
            let p2 = macdonald_polynomial(&p("2"), 3, &qt).unwrap();
            assert_eq!(p2.u[&p("1,1")], expected);
        }
    }

    #[test]
    fn eigen_relation_and_triangularity() {
        for qt in [standard(), qt((2, 3), (3, 1))] {
            for lam in partitions_up_to(5, 3) {
                let expansion = macdonald_polynomial(&lam, 3, &qt).unwrap();
                for mu in expansion.u.keys() {
                    assert!(mu != &lam && dominance_leq(mu, &lam), "{mu} under {lam}");
                }
                let poly = expansion.to_multipoly().unwrap();
                let d = eigenvalue_vector(&lam, 3, &qt).unwrap();
                for r in 0..=3 {
                    assert_eq!(apply_macdonald_operator(r, &poly, &qt).unwrap(), poly.scale(d.get(r)));
                }
            }
        }
    }

    #[test]
    fn symmetric_and_homogeneous() {
        let qt = standard();
        let perms = [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]];
        for lam in partitions_up_to(4, 3) {
            let poly = macdonald_polynomial(&lam, 3, &qt).unwrap().to_multipoly().unwrap();
            for perm in perms {
                assert_eq!(poly.permute_vars(&perm), poly);
            }
            let c = Rational::from((-3, 7));
            let scaled = poly.scale_vars(&[c.clone(), c.clone(), c.clone()]);
            assert_eq!(scaled, poly.scale(&rational_pow(&c, lam.weight() as i32)));
        }
    }

    #[test]
    fn eigenvalue_collision_is_rejected() {
        // q t = 1 makes d¹((2)) = d¹((1,1))
        let qt = qt((2, 1), (1, 2));
        assert_eq!(
            macdonald_polynomial(&p("2"), 3, &qt),
            Err(MacdonaldError::SingularSystem { lambda: p("2"), mu: p("1,1") })
        );
        assert!(matches!(
            macdonald_polynomial(&p("1,1,1,1"), 3, &standard()),
            Err(MacdonaldError::Exact(ExactError::LengthExceedsVariables { .. }))
        ));
    }

    #[test]
    fn dehomogenize_examples() {
        let qt = standard();
        let get = |s: &str| dehomogenize(&macdonald_polynomial(&p(s), 3, &qt).unwrap()).unwrap();
        assert_eq!(get("1"), TwoVarPoly::parse("z1 + z2 + 1").unwrap());
        assert_eq!(get("1,1,1"), TwoVarPoly::parse("z1*z2").unwrap());
        assert_eq!(get("1,1"), TwoVarPoly::parse("z1*z2 + z1 + z2").unwrap());
        assert_eq!(get("2").to_string(), "z1^2 + 27/8*z1*z2 + 27/8*z1 + z2^2 + 27/8*z2 + 1");
        let p4 = macdonald_polynomial(&p("1"), 4, &qt).unwrap();
        assert_eq!(dehomogenize(&p4), Err(MacdonaldError::WrongVariableCount(4)));
    }

    #[test]
    fn json_shape() {
        let p2 = macdonald_polynomial(&p("2"), 3, &standard()).unwrap();
        let v = p2.to_json();
        assert_eq!(v["lambda"], json!([2]));
        assert_eq!(v["q"], "1/2");
        assert_eq!(v["u"][0]["mu"], json!([1, 1]));
        assert_eq!(v["u"][0]["coeff"], "27/8");
    }

    #[test]
    fn symmetric_roundtrip_and_rejection() {
        let mut s = SymmetricPoly::zero(3);
        s.add_term(p("2,1"), Rational::from(3)).unwrap();
        s.add_term(p("1,1,1"), Rational::from((-1, 2))).unwrap();
        let f = s.to_multipoly().unwrap();
        assert_eq!(SymmetricPoly::from_multipoly(&f).unwrap(), s);
        let mut g = f.clone();
        g.add_term(vec![2, 1, 0], Rational::from(1));
        assert_eq!(SymmetricPoly::from_multipoly(&g), Err(MacdonaldError::NotSymmetric));
    }

    #[test]
    fn parser_handles_the_grammar() {
        let a = TwoVarPoly::parse("(y1 - y2)^2 + 3/2*y1").unwrap();
        let b = TwoVarPoly::parse("z1^2 - 2*z1*z2 + z2^2 + 1.5*z1").unwrap();
        assert_eq!(a, b);
        assert_eq!(TwoVarPoly::parse("-1 + x1/2").unwrap().to_string(), "1/2*z1 - 1");
        assert_eq!(TwoVarPoly::parse("y1^3 + y2^3").unwrap(), TwoVarPoly::power_sum(3));
        assert!(TwoVarPoly::parse("y3").is_err());
        assert!(TwoVarPoly::parse("y1/y2").is_err());
        assert!(TwoVarPoly::parse("(y1").is_err());
    }

    fn random_symmetric() -> impl Strategy<Value = SymmetricPoly> {
        let basis = partitions_up_to(5, 3);
        let k = basis.len();
        prop::collection::vec((0..k, -20i64..20, 1i64..6), 1..6).prop_map(move |terms| {
            let mut s = SymmetricPoly::zero(3);
            for (idx, num, den) in terms {
                s.add_term(basis[idx].clone(), Rational::from((num, den))).unwrap();
            }
            s
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]
        #[test]
        fn operators_commute(s in random_symmetric()) {
            let qt = standard();
            let f = s.to_multipoly().unwrap();
            let a = apply_macdonald_operator(1, &apply_macdonald_operator(2, &f, &qt).unwrap(), &qt).unwrap();
            let b = apply_macdonald_operator(2, &apply_macdonald_operator(1, &f, &qt).unwrap(), &qt).unwrap();
            prop_assert_eq!(a, b);
        }

        #[test]
        fn operators_preserve_symmetry(s in random_symmetric(), r in 0usize..=3) {
            let f = s.to_multipoly().unwrap();
            let image = apply_macdonald_operator(r, &f, &standard()).unwrap();
            prop_assert!(SymmetricPoly::from_multipoly(&image).is_ok());
        }
    }
}
