//! Exact linear algebra over the rationals and over polynomial entries.

use itertools::Itertools;
use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use super::polynomial::{Polynomial, Rational};

/// Scales a rational row to coprime integers.
fn integer_row(row: &[Rational]) -> Vec<BigInt> {
    let l = row.iter().fold(BigInt::one(), |l, r| l.lcm(r.denom()));
    let mut out: Vec<BigInt> = row.iter().map(|r| r.numer() * (&l / r.denom())).collect();
    remove_content(&mut out);
    out
}

fn remove_content(row: &mut [BigInt]) {
    let g = row.iter().fold(BigInt::zero(), |g, x| g.gcd(x));
    if !g.is_zero() && !g.is_one() {
        for x in row.iter_mut() {
            *x /= &g;
        }
    }
}

/// Fraction-free Gauss–Jordan elimination. Rows are kept integral by
/// cross-multiplication and divided by their content after every update.
/// Pivots are chosen as the first nonzero entry scanning columns left to
/// right. Returns the reduced rows and the pivot columns.
fn eliminate(rows: &[Vec<Rational>], ncols: usize) -> (Vec<Vec<BigInt>>, Vec<usize>) {
    let mut a: Vec<Vec<BigInt>> = rows
        .iter()
        .map(|r| {
            assert_eq!(r.len(), ncols, "ragged matrix");
            integer_row(r)
        })
        .filter(|r| r.iter().any(|x| !x.is_zero()))
        .collect();
    let mut pivots = Vec::new();
    let mut prow = 0;
    for col in 0..ncols {
        if prow == a.len() {
            break;
        }
        let Some(r) = (prow..a.len()).find(|&r| !a[r][col].is_zero()) else {
            continue;
        };
        a.swap(prow, r);
        let pivot_row = a[prow].clone();
        let p = pivot_row[col].clone();
        for (i, row) in a.iter_mut().enumerate() {
            if i == prow || row[col].is_zero() {
                continue;
            }
            let f = row[col].clone();
            for (x, y) in row.iter_mut().zip(pivot_row.iter()) {
                *x = &p * &*x - &f * y;
            }
            remove_content(row);
        }
        pivots.push(col);
        prow += 1;
    }
    a.truncate(prow);
    (a, pivots)
}

pub fn rank_exact(rows: &[Vec<Rational>], ncols: usize) -> usize {
    eliminate(rows, ncols).1.len()
}

/// Basis of the right nullspace `{v : M v = 0}`.
///
/// One vector per free column, in column order; each has integer entries with
/// content 1 and a positive entry at its free column.
pub fn nullspace_exact(rows: &[Vec<Rational>], ncols: usize) -> Vec<Vec<BigInt>> {
    let (a, pivots) = eliminate(rows, ncols);
    let free = (0..ncols).filter(|c| !pivots.contains(c));
    free.map(|f| {
        let mut v: Vec<BigRational> = vec![BigRational::zero(); ncols];
        v[f] = BigRational::one();
        for (row, &pc) in a.iter().zip(pivots.iter()) {
            if !row[f].is_zero() {
                v[pc] = -BigRational::new(row[f].clone(), row[pc].clone());
            }
        }
        let mut iv = integer_row(&v);
        if iv[f].is_negative() {
            iv.iter_mut().for_each(|x| *x = -&*x);
        }
        iv
    })
    .collect()
}

/// Inverse of a square rational matrix, or `None` if it is singular.
pub fn invert_exact(m: &[Vec<Rational>]) -> Option<Vec<Vec<Rational>>> {
    let n = m.len();
    let mut a: Vec<Vec<Rational>> = m
        .iter()
        .enumerate()
        .map(|(i, row)| {
            assert_eq!(row.len(), n, "matrix must be square");
            let mut r = row.clone();
            r.extend((0..n).map(|j| if i == j { BigRational::one() } else { BigRational::zero() }));
            r
        })
        .collect();
    for col in 0..n {
        let r = (col..n).find(|&r| !a[r][col].is_zero())?;
        a.swap(col, r);
        let p = a[col][col].clone();
        a[col].iter_mut().for_each(|x| *x /= &p);
        let pivot_row = a[col].clone();
        for (i, row) in a.iter_mut().enumerate() {
            if i == col || row[col].is_zero() {
                continue;
            }
            let f = row[col].clone();
            for (x, y) in row.iter_mut().zip(pivot_row.iter()) {
                *x -= &f * y;
            }
        }
    }
    Some(a.into_iter().map(|r| r[n..].to_vec()).collect())
}

/// Determinant of a small square polynomial matrix by cofactor expansion,
/// skipping zero entries.
pub fn determinant(m: &[Vec<Polynomial>]) -> Polynomial {
    let n = m.len();
    match n {
        0 => Polynomial::one(),
        1 => m[0][0].clone(),
        2 => &m[0][0] * &m[1][1] - &m[0][1] * &m[1][0],
        _ => {
            let mut acc = Polynomial::zero();
            for j in 0..n {
                if m[0][j].is_zero() {
                    continue;
                }
                let minor: Vec<Vec<Polynomial>> = m[1..]
                    .iter()
                    .map(|row| {
                        row.iter()
                            .enumerate()
                            .filter(|(k, _)| *k != j)
                            .map(|(_, x)| x.clone())
                            .collect()
                    })
                    .collect();
                let t = &m[0][j] * &determinant(&minor);
                acc = if j % 2 == 0 { acc + t } else { acc - t };
            }
            acc
        }
    }
}

/// A nonvanishing minor: the chosen rows and columns and its determinant.
#[derive(Clone, Debug, PartialEq)]
pub struct MinorWitness {
    pub rows: Vec<usize>,
    pub cols: Vec<usize>,
    pub det: Polynomial,
}

/// Rank over the field of fractions of a matrix with polynomial entries,
/// decided by exact minors, with a largest nonvanishing minor as witness.
pub fn rank_over_polynomials(m: &[Vec<Polynomial>]) -> (usize, Option<MinorWitness>) {
    let nrows = m.len();
    let ncols = m.first().map_or(0, Vec::len);
    let mut best: Option<MinorWitness> = None;
    for k in 1..=nrows.min(ncols) {
        let found = (0..ncols).combinations(k).find_map(|cols| {
            (0..nrows).combinations(k).find_map(|rows| {
                let sub: Vec<Vec<Polynomial>> = rows
                    .iter()
                    .map(|&r| cols.iter().map(|&c| m[r][c].clone()).collect())
                    .collect();
                let det = determinant(&sub);
                (!det.is_zero()).then(|| MinorWitness {
                    rows: rows.clone(),
                    cols: cols.clone(),
                    det,
                })
            })
        });
        match found {
            Some(w) => best = Some(w),
            None => break,
        }
    }
    (best.as_ref().map_or(0, |w| w.rows.len()), best)
}
