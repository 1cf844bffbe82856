use rug::Rational;

use super::{MacdonaldError, QTPoint};
use crate::exact::{rational_pow, MultiPoly, Partition};

/// Eigenvalues `d_n^0(λ), …, d_n^n(λ)`: the coefficients of
/// `∏ᵢ (1 + X q^{λᵢ} t^{n−i})` in increasing powers of `X`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EigenvalueVector {
    pub d: Vec<Rational>,
}

impl EigenvalueVector {
    pub fn n(&self) -> usize {
        self.d.len() - 1
    }

    pub fn get(&self, r: usize) -> &Rational {
        &self.d[r]
    }
}

/// `m_λ` in `x1, …, xn`: the sum over distinct permutations of the padded
/// parts.
pub fn monomial_sym(lambda: &Partition, n: usize) -> Result<MultiPoly, MacdonaldError> {
    let mut exps: Vec<i32> = lambda.padded(n)?.into_iter().map(|p| p as i32).collect();
    let mut out = MultiPoly::zero_in(n);
    // start from the lowest permutation and walk them all in lex order
    exps.sort_unstable();
    loop {
        out.add_term(exps.clone(), Rational::from(1));
        if !next_permutation(&mut exps) {
            break;
        }
    }
    Ok(out)
}

fn next_permutation(v: &mut [i32]) -> bool {
    let Some(i) = (1..v.len()).rev().find(|&i| v[i - 1] < v[i]) else {
        return false;
    };
    let j = (i..v.len()).rev().find(|&j| v[j] > v[i - 1]).unwrap();
    v.swap(i - 1, j);
    v[i..].reverse();
    true
}

pub fn eigenvalue_vector(lambda: &Partition, n: usize, qt: &QTPoint) -> Result<EigenvalueVector, MacdonaldError> {
    let parts = lambda.padded(n)?;
    let mut d = vec![Rational::from(1)];
    for (i, &p) in parts.iter().enumerate() {
        let c = rational_pow(&qt.q, p as i32) * rational_pow(&qt.t, (n - 1 - i) as i32);
        let mut next = d.clone();
        next.push(Rational::new());
        for (k, dk) in d.iter().enumerate() {
            next[k + 1] += Rational::from(dk * &c);
        }
        d = next;
    }
    Ok(EigenvalueVector { d })
}

/// Applies the Macdonald operator `D_n^r` to a symmetric polynomial in
/// `n = f.nvars()` variables.
///
/// Every subset term is put over the Vandermonde product
/// `Δ = ∏_{a<b} (x_a − x_b)` and the summed numerator is divided exactly
/// by `Δ`. A non-symmetric `f` generally leaves a remainder, reported as
/// `NotDivisible`.
pub fn apply_macdonald_operator(r: usize, f: &MultiPoly, qt: &QTPoint) -> Result<MultiPoly, MacdonaldError> {
    let n = f.nvars();
    if r > n {
        return Err(MacdonaldError::OperatorIndex { r, n });
    }
    let var = |i: usize| f.var_like(i);
    let diff = |a: usize, b: usize| &var(a) - &var(b);

    let mut vandermonde = f.constant_like(1);
    for a in 0..n {
        for b in a + 1..n {
            vandermonde = &vandermonde * &diff(a, b);
        }
    }

    let mut numerator = f.empty_like();
    for subset in subsets_of_size(n, r) {
        let inside = |i: usize| subset & (1 << i) != 0;
        let mut term = f.constant_like(1);
        let mut sign_flips = 0usize;
        for i in (0..n).filter(|&i| inside(i)) {
            for j in (0..n).filter(|&j| !inside(j)) {
                let tx_minus_x = &var(i).scale(&qt.t) - &var(j);
                term = &term * &tx_minus_x;
                if i > j {
                    sign_flips += 1;
                }
            }
        }
        // cofactor of the crossing pairs inside Δ
        for a in 0..n {
            for b in a + 1..n {
                if inside(a) == inside(b) {
                    term = &term * &diff(a, b);
                }
            }
        }
        if sign_flips % 2 == 1 {
            term = -&term;
        }
        let shifts: Vec<Rational> = (0..n)
            .map(|i| if inside(i) { qt.q.clone() } else { Rational::from(1) })
            .collect();
        numerator = &numerator + &(&term * &f.scale_vars(&shifts));
    }

    let prefactor = rational_pow(&qt.t, (r * r.saturating_sub(1) / 2) as i32);
    Ok(numerator.exact_divide(&vandermonde)?.scale(&prefactor))
}

fn subsets_of_size(n: usize, r: usize) -> impl Iterator<Item = u32> {
    (0u32..(1u32 << n)).filter(move |s| s.count_ones() as usize == r)
}
