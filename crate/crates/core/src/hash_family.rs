//! `ell` independent one-bit hash functions, each exactly k-wise independent.
//!
//! Function `i` is a uniformly random polynomial of degree below `k` over
//! GF(2^w); its output on `x` is the least significant bit of the polynomial
//! evaluated at `x` (embedded as a field element). Distinct inputs give
//! distinct evaluation points as long as `w >= u_bits`, so any `k` distinct
//! inputs see jointly uniform field values and therefore jointly uniform
//! bits, whichever way the inputs were chosen.
//!
//! Description size is `ell * k * w` bits; evaluation is `k` field
//! operations per bit.

use rand::Rng;

use crate::bits::{BitReader, BitWriter};
use crate::error::{Error, Result};
use crate::gf::{BinaryField, MulTable};
use crate::params::Element;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GFamily {
    field: BinaryField,
    ell: usize,
    k: usize,
    /// `ell * k` coefficients; function `i` owns `coeffs[i*k..(i+1)*k]`,
    /// constant term first.
    coeffs: Vec<u64>,
}

impl GFamily {
    pub fn sample<R: Rng + ?Sized>(ell: usize, k: usize, field_width: u32, u_bits: u32, rng: &mut R) -> Result<Self> {
        if field_width < u_bits {
            return Err(Error::FieldTooNarrow { width: field_width, u_bits });
        }
        if ell == 0 || k == 0 {
            return Err(Error::InvalidParams(format!("ell = {ell} and k = {k} must both be positive")));
        }
        let field = BinaryField::new(field_width)?;
        let mask = field.mask();
        let coeffs = (0..ell * k).map(|_| rng.gen::<u64>() & mask).collect();
        Ok(Self { field, ell, k, coeffs })
    }

    pub fn from_coefficients(ell: usize, k: usize, field_width: u32, coeffs: Vec<u64>) -> Result<Self> {
        let field = BinaryField::new(field_width)?;
        if coeffs.len() != ell * k || ell == 0 || k == 0 {
            return Err(Error::InvalidParams(format!("expected {} coefficients, got {}", ell * k, coeffs.len())));
        }
        if coeffs.iter().any(|&c| c & !field.mask() != 0) {
            return Err(Error::InvalidParams("coefficient wider than the field".into()));
        }
        Ok(Self { field, ell, k, coeffs })
    }

    pub fn ell(&self) -> usize {
        self.ell
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn field(&self) -> BinaryField {
        self.field
    }

    pub fn field_width(&self) -> u32 {
        self.field.width()
    }

    pub fn rep_bits(&self) -> u64 {
        (self.ell * self.k) as u64 * self.field.width() as u64
    }

    fn poly(&self, i: usize) -> &[u64] {
        &self.coeffs[i * self.k..(i + 1) * self.k]
    }

    /// Field value of function `i` at `x`.
    pub fn eval(&self, i: usize, x: Element) -> u64 {
        let mut t = MulTable::new();
        t.load(self.field, x.0);
        t.horner(self.poly(i))
    }

    pub fn eval_bit(&self, i: usize, x: Element) -> bool {
        assert!(i < self.ell, "function index {i} out of range");
        self.eval(i, x) & 1 == 1
    }

    /// All `ell` bits of `x`; bit `i` of the result is function `i`.
    pub fn fingerprint(&self, x: Element) -> u64 {
        let mut t = MulTable::new();
        self.fingerprint_with(&mut t, x)
    }

    pub fn fingerprint_with(&self, table: &mut MulTable, x: Element) -> u64 {
        assert!(self.ell <= 64);
        table.load(self.field, x.0);
        (0..self.ell).fold(0, |fp, i| fp | ((table.horner(self.poly(i)) & 1) << i))
    }

    /// Loads `x` into `table` for repeated [`GFamily::loaded_bit`] calls.
    pub fn load_point(&self, table: &mut MulTable, x: Element) {
        table.load(self.field, x.0);
    }

    /// Bit of function `i` at the point last loaded into `table`.
    #[inline]
    pub fn loaded_bit(&self, table: &MulTable, i: usize) -> bool {
        table.horner(self.poly(i)) & 1 == 1
    }

    /// Coefficients in index order, each `w` bits big-endian.
    pub fn write_bits(&self, out: &mut BitWriter) {
        for &c in &self.coeffs {
            out.push(c, self.field.width());
        }
    }

    pub fn read_bits(reader: &mut BitReader<'_>, ell: usize, k: usize, field_width: u32) -> Result<Self> {
        let coeffs = (0..ell * k)
            .map(|_| reader.read(field_width))
            .collect::<Option<Vec<_>>>()
            .ok_or_else(|| Error::InvalidParams("truncated family encoding".into()))?;
        Self::from_coefficients(ell, k, field_width, coeffs)
    }
}
