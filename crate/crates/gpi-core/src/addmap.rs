//! Additive maps of an algebra, stored as d x d matrices over F_p.
//!
//! In characteristic p an additive endomorphism of a finite F_p-space is
//! automatically F_p-linear, so a matrix acting on coordinate columns
//! captures every additive map exactly. Named constructors cover the maps
//! the identity solver works with: identity, zero, scalar multiples, left
//! and right multiplications, elementary operators `x -> sum a_i x b_i`,
//! Frobenius powers on commutative algebras, and the transpose on matrix
//! algebras.

use crate::algebra::{Element, FiniteAlgebra};
use crate::error::{Error, Result};
use crate::fp::FpMat;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AdditiveMap {
    algebra: FiniteAlgebra,
    matrix: FpMat,
}

impl AdditiveMap {
    pub fn from_matrix(algebra: &FiniteAlgebra, matrix: FpMat) -> Result<AdditiveMap> {
        if matrix.rows() != algebra.dim() || matrix.cols() != algebra.dim() {
            return Err(Error::DimensionMismatch {
                expected: algebra.dim(),
                found: matrix.rows().max(matrix.cols()),
            });
        }
        if matrix.p() != algebra.p() {
            return Err(Error::CharMismatch { expected: algebra.p(), found: matrix.p() });
        }
        Ok(AdditiveMap { algebra: algebra.clone(), matrix })
    }

    pub fn from_rows(algebra: &FiniteAlgebra, rows: Vec<Vec<u64>>) -> Result<AdditiveMap> {
        if rows.len() != algebra.dim() || rows.iter().any(|r| r.len() != algebra.dim()) {
            return Err(Error::DimensionMismatch {
                expected: algebra.dim(),
                found: rows.len(),
            });
        }
        Ok(AdditiveMap {
            algebra: algebra.clone(),
            matrix: FpMat::from_rows(algebra.p(), rows),
        })
    }

    /// The map determined by images of the standard basis.
    pub fn from_basis_images(algebra: &FiniteAlgebra, images: &[Element]) -> Result<AdditiveMap> {
        if images.len() != algebra.dim() {
            return Err(Error::DimensionMismatch {
                expected: algebra.dim(),
                found: images.len(),
            });
        }
        let d = algebra.dim();
        let mut m = FpMat::zeros(algebra.p(), d, d);
        for (j, img) in images.iter().enumerate() {
            if img.algebra() != algebra {
                return Err(Error::AlgebraMismatch);
            }
            for (i, &v) in img.coords().iter().enumerate() {
                m.set(i, j, v);
            }
        }
        Ok(AdditiveMap { algebra: algebra.clone(), matrix: m })
    }

    pub fn zero(algebra: &FiniteAlgebra) -> AdditiveMap {
        AdditiveMap {
            algebra: algebra.clone(),
            matrix: FpMat::zeros(algebra.p(), algebra.dim(), algebra.dim()),
        }
    }

    pub fn identity(algebra: &FiniteAlgebra) -> AdditiveMap {
        AdditiveMap { algebra: algebra.clone(), matrix: FpMat::identity(algebra.p(), algebra.dim()) }
    }

    /// x -> a x.
    pub fn left_mul(a: &Element) -> AdditiveMap {
        AdditiveMap { algebra: a.algebra().clone(), matrix: a.algebra().left_mul_matrix(a) }
    }

    /// x -> x b.
    pub fn right_mul(b: &Element) -> AdditiveMap {
        AdditiveMap { algebra: b.algebra().clone(), matrix: b.algebra().right_mul_matrix(b) }
    }

    /// The elementary operator x -> sum_i a_i x b_i.
    pub fn elementary(algebra: &FiniteAlgebra, pairs: &[(Element, Element)]) -> Result<AdditiveMap> {
        let mut acc = AdditiveMap::zero(algebra);
        for (a, b) in pairs {
            if a.algebra() != algebra || b.algebra() != algebra {
                return Err(Error::AlgebraMismatch);
            }
            let term = algebra.left_mul_matrix(a).mat_mul(&algebra.right_mul_matrix(b));
            acc.matrix = acc.matrix.add_mat(&term);
        }
        Ok(acc)
    }

    /// The Frobenius power x -> x^(p^l). Additive only when the algebra is
    /// commutative, which is checked.
    pub fn frobenius(algebra: &FiniteAlgebra, l: u32) -> Result<AdditiveMap> {
        if !algebra.is_commutative() {
            return Err(Error::Hypothesis(
                "Frobenius powers are additive only over commutative algebras".into(),
            ));
        }
        let e = algebra
            .p()
            .checked_pow(l)
            .ok_or_else(|| Error::BadParameter("Frobenius exponent overflows".into()))?;
        let images: Vec<Element> =
            (0..algebra.dim()).map(|i| algebra.basis_elem(i).pow(e)).collect();
        AdditiveMap::from_basis_images(algebra, &images)
    }

    /// Matrix transpose on M_n(GF(p^k)), available when the matrix structure
    /// is known (recorded at construction or recognized from the labels).
    pub fn transpose(algebra: &FiniteAlgebra) -> Result<AdditiveMap> {
        let (n, k) = algebra.matrix_structure().ok_or_else(|| {
            Error::Hypothesis("transpose needs a matrix algebra M_n(GF(p^k))".into())
        })?;
        let d = algebra.dim();
        let idx = |i: usize, j: usize, a: usize| ((i * n) + j) * k + a;
        let mut images = Vec::with_capacity(d);
        for i in 0..n {
            for j in 0..n {
                for a in 0..k {
                    images.push(algebra.basis_elem(idx(j, i, a)));
                }
            }
        }
        // images is indexed in (i, j, a) order with image e_ji t^a.
        AdditiveMap::from_basis_images(algebra, &images)
    }

    pub fn algebra(&self) -> &FiniteAlgebra {
        &self.algebra
    }

    pub fn matrix(&self) -> &FpMat {
        &self.matrix
    }

    pub fn rows(&self) -> Vec<Vec<u64>> {
        self.matrix.row_vecs()
    }

    pub fn is_zero(&self) -> bool {
        self.rows().iter().all(|r| r.iter().all(|&v| v == 0))
    }

    pub fn apply(&self, x: &Element) -> Element {
        assert_eq!(&self.algebra, x.algebra(), "operands belong to different algebras");
        self.algebra
            .from_coords(self.matrix.mul_vec(x.coords()))
            .expect("matrix output has the right length")
    }

    pub fn add(&self, other: &AdditiveMap) -> Result<AdditiveMap> {
        if self.algebra != other.algebra {
            return Err(Error::AlgebraMismatch);
        }
        Ok(AdditiveMap { algebra: self.algebra.clone(), matrix: self.matrix.add_mat(&other.matrix) })
    }

    pub fn neg(&self) -> AdditiveMap {
        let p = self.algebra.p();
        self.scale(p - 1)
    }

    pub fn scale(&self, c: u64) -> AdditiveMap {
        AdditiveMap { algebra: self.algebra.clone(), matrix: self.matrix.scale(c) }
    }

    /// self after other: x -> self(other(x)).
    pub fn compose(&self, other: &AdditiveMap) -> Result<AdditiveMap> {
        if self.algebra != other.algebra {
            return Err(Error::AlgebraMismatch);
        }
        Ok(AdditiveMap {
            algebra: self.algebra.clone(),
            matrix: self.matrix.mat_mul(&other.matrix),
        })
    }
}
