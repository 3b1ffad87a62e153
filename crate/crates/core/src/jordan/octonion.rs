//! Octonion arithmetic over the basis `(1, e1, ..., e7)`.
//!
//! Multiplication follows the cyclic Fano-plane convention with the seven
//! oriented triples
//!
//! ```text
//! (1,2,4) (2,3,5) (3,4,6) (4,5,7) (5,6,1) (6,7,2) (7,1,3)
//! ```
//!
//! i.e. `e_i e_{i+1} = e_{i+3}` with indices mod 7, each triple
//! anticommuting cyclically, `e_i^2 = -1`. Any fixed convention yields an
//! isomorphic algebra.

use std::ops::{Add, Mul, Neg, Sub};
use std::sync::OnceLock;

use crate::scalar::Real;

const TRIPLES: [[usize; 3]; 7] = [
    [1, 2, 4],
    [2, 3, 5],
    [3, 4, 6],
    [4, 5, 7],
    [5, 6, 1],
    [6, 7, 2],
    [7, 1, 3],
];

/// `table[i][j] = (sign, k)` with `e_i e_j = sign * e_k`.
fn table() -> &'static [[(i8, usize); 8]; 8] {
    static TABLE: OnceLock<[[(i8, usize); 8]; 8]> = OnceLock::new();
    TABLE.get_or_init(|| {
        let mut t = [[(0i8, 0usize); 8]; 8];
        for j in 0..8 {
            t[0][j] = (1, j);
            t[j][0] = (1, j);
        }
        for i in 1..8 {
            t[i][i] = (-1, 0);
        }
        for [a, b, c] in TRIPLES {
            for (x, y, z) in [(a, b, c), (b, c, a), (c, a, b)] {
                t[x][y] = (1, z);
                t[y][x] = (-1, z);
            }
        }
        t
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Octonion<T: Real> {
    pub c: [T; 8],
}

impl<T: Real> Octonion<T> {
    pub fn zero() -> Self {
        Octonion { c: [T::zero(); 8] }
    }

    pub fn one() -> Self {
        let mut c = [T::zero(); 8];
        c[0] = T::one();
        Octonion { c }
    }

    pub fn unit(i: usize) -> Self {
        let mut c = [T::zero(); 8];
        c[i] = T::one();
        Octonion { c }
    }

    pub fn from_real(x: T) -> Self {
        let mut c = [T::zero(); 8];
        c[0] = x;
        Octonion { c }
    }

    pub fn re(&self) -> T {
        self.c[0]
    }

    pub fn conj(&self) -> Self {
        let mut c = self.c;
        for x in c.iter_mut().skip(1) {
            *x = -*x;
        }
        Octonion { c }
    }

    pub fn norm_sqr(&self) -> T {
        self.c.iter().fold(T::zero(), |acc, x| acc + *x * *x)
    }

    pub fn scale(&self, s: T) -> Self {
        let mut c = self.c;
        for x in c.iter_mut() {
            *x *= s;
        }
        Octonion { c }
    }
}

impl<T: Real> Add for Octonion<T> {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        let mut c = self.c;
        for i in 0..8 {
            c[i] += rhs.c[i];
        }
        Octonion { c }
    }
}

impl<T: Real> Sub for Octonion<T> {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        let mut c = self.c;
        for i in 0..8 {
            c[i] -= rhs.c[i];
        }
        Octonion { c }
    }
}

impl<T: Real> Neg for Octonion<T> {
    type Output = Self;
    fn neg(self) -> Self {
        let mut c = self.c;
        for x in c.iter_mut() {
            *x = -*x;
        }
        Octonion { c }
    }
}

impl<T: Real> Mul for Octonion<T> {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        let t = table();
        let mut c = [T::zero(); 8];
        for i in 0..8 {
            if self.c[i] == T::zero() {
                continue;
            }
            for j in 0..8 {
                if rhs.c[j] == T::zero() {
                    continue;
                }
                let (sign, k) = t[i][j];
                let term = self.c[i] * rhs.c[j];
                if sign > 0 {
                    c[k] += term;
                } else {
                    c[k] -= term;
                }
            }
        }
        Octonion { c }
    }
}
