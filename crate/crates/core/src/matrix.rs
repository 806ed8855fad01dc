use alloc::vec;
use alloc::vec::Vec;
use core::fmt::Debug;

use crate::error::{Error, OverflowSite, Result};

/// Row-major dense matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

impl<T: Copy> Matrix<T> {
    pub fn new(rows: usize, cols: usize, data: Vec<T>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::ShapeMismatch {
                operand: "matrix data",
                expected_rows: rows,
                expected_cols: cols,
                found_rows: data.len(),
                found_cols: 1,
            });
        }
        Ok(Matrix { rows, cols, data })
    }

    pub fn filled(rows: usize, cols: usize, value: T) -> Self {
        Matrix {
            rows,
            cols,
            data: vec![value; rows * cols],
        }
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                data.push(f(r, c));
            }
        }
        Matrix { rows, cols, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> T {
        self.data[row * self.cols + col]
    }

    #[inline]
    pub fn set(&mut self, row: usize, col: usize, value: T) {
        self.data[row * self.cols + col] = value;
    }

    pub fn as_slice(&self) -> &[T] {
        &self.data
    }
}

/// Numeric element the emulator can execute.
///
/// Integers are checked against the configured bit widths (signed two's
/// complement ranges); reals only have to be finite.
pub trait Element: Copy + PartialEq + Debug + Default {
    fn check_operand(self, bits: u32, site: OverflowSite) -> Result<()>;

    /// `acc + a * w`, checked against the accumulator width.
    fn mac(acc: Self, a: Self, w: Self, acc_bits: u32) -> Result<Self>;

    /// `acc + x`, checked against the accumulator width.
    fn accumulate(acc: Self, x: Self, acc_bits: u32) -> Result<Self>;
}

fn fits(value: i128, bits: u32) -> bool {
    let bound = 1i128 << (bits - 1);
    (-bound..bound).contains(&value)
}

fn checked(value: i128, bits: u32, site: OverflowSite) -> Result<i64> {
    if fits(value, bits) {
        Ok(value as i64)
    } else {
        Err(Error::BitwidthOverflow { site, bits, value })
    }
}

impl Element for i64 {
    fn check_operand(self, bits: u32, site: OverflowSite) -> Result<()> {
        checked(i128::from(self), bits, site).map(|_| ())
    }

    fn mac(acc: Self, a: Self, w: Self, acc_bits: u32) -> Result<Self> {
        let value = i128::from(acc) + i128::from(a) * i128::from(w);
        checked(value, acc_bits, OverflowSite::Accumulator)
    }

    fn accumulate(acc: Self, x: Self, acc_bits: u32) -> Result<Self> {
        checked(
            i128::from(acc) + i128::from(x),
            acc_bits,
            OverflowSite::Accumulator,
        )
    }
}

impl Element for f64 {
    fn check_operand(self, _bits: u32, _site: OverflowSite) -> Result<()> {
        if self.is_finite() {
            Ok(())
        } else {
            Err(Error::NonFiniteOperand)
        }
    }

    fn mac(acc: Self, a: Self, w: Self, _acc_bits: u32) -> Result<Self> {
        Ok(acc + a * w)
    }

    fn accumulate(acc: Self, x: Self, _acc_bits: u32) -> Result<Self> {
        Ok(acc + x)
    }
}
