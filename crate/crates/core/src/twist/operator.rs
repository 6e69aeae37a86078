//! Operators on spinor fields as symbolic term lists.
//!
//! An operator is a finite sum of (matrix-valued field) x (derivative
//! multi-index) terms plus an antilinearity flag. Assembling dense matrices
//! over a 16^4 grid is infeasible, so composition, adjoints and
//! rho-conjugation are done on the term lists; equality is tested by
//! canonical coefficient comparison and by application to field batteries.
//!
//! The adjoint canonicalization uses integration by parts, which is exact
//! for the discrete inner product whenever the derivative coefficients are
//! constant matrices (the only operators the suite takes adjoints of).

use crate::error::{ensure_identity, Error, Result};
use crate::geometry::field::{MatrixField, SpinorField};
use crate::geometry::grid::TorusGrid;
use crate::linalg::CMatrix;
use num_complex::Complex64;
use std::collections::BTreeMap;

pub const MAX_DERIV_ORDER: usize = 2;

#[derive(Debug, Clone)]
pub struct OpTerm {
    pub coeff: MatrixField,
    /// Sorted multi-index of derivative axes, order <= 2.
    pub deriv: Vec<u8>,
}

#[derive(Debug, Clone)]
pub struct SpinorOperator {
    grid: TorusGrid,
    dim: usize,
    antilinear: bool,
    terms: Vec<OpTerm>,
}

impl SpinorOperator {
    pub fn zero(grid: &TorusGrid, dim: usize) -> Self {
        SpinorOperator {
            grid: grid.clone(),
            dim,
            antilinear: false,
            terms: Vec::new(),
        }
    }

    pub fn identity(grid: &TorusGrid, dim: usize) -> Self {
        SpinorOperator::from_constant(grid, CMatrix::identity(dim, dim))
    }

    pub fn from_constant(grid: &TorusGrid, mat: CMatrix) -> Self {
        let dim = mat.nrows();
        SpinorOperator {
            grid: grid.clone(),
            dim,
            antilinear: false,
            terms: vec![OpTerm {
                coeff: MatrixField::constant(mat),
                deriv: vec![],
            }],
        }
    }

    pub fn from_matrix_field(grid: &TorusGrid, coeff: MatrixField) -> Self {
        let dim = coeff.dim();
        SpinorOperator {
            grid: grid.clone(),
            dim,
            antilinear: false,
            terms: vec![OpTerm { coeff, deriv: vec![] }],
        }
    }

    /// Antilinear operator `psi -> U conj(psi)`.
    pub fn antilinear_from_constant(grid: &TorusGrid, mat: CMatrix) -> Self {
        let mut op = SpinorOperator::from_constant(grid, mat);
        op.antilinear = true;
        op
    }

    pub fn from_terms(grid: &TorusGrid, dim: usize, terms: Vec<OpTerm>, antilinear: bool) -> Self {
        let mut op = SpinorOperator {
            grid: grid.clone(),
            dim,
            antilinear,
            terms,
        };
        op.canonicalize();
        op
    }

    pub fn grid(&self) -> &TorusGrid {
        &self.grid
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn is_antilinear(&self) -> bool {
        self.antilinear
    }

    pub fn terms(&self) -> &[OpTerm] {
        &self.terms
    }

    pub fn max_order(&self) -> usize {
        self.terms.iter().map(|t| t.deriv.len()).max().unwrap_or(0)
    }

    /// Canonical coefficient of a derivative multi-index (zero field when
    /// absent).
    pub fn coeff_for(&self, deriv: &[u8]) -> MatrixField {
        for t in &self.terms {
            if t.deriv == deriv {
                return t.coeff.clone();
            }
        }
        MatrixField::zero_constant(self.dim)
    }

    pub fn apply(&self, psi: &SpinorField) -> SpinorField {
        assert!(self.grid.same_grid(psi.grid()));
        assert_eq!(self.dim, psi.dim());
        let source = if self.antilinear { psi.conj() } else { psi.clone() };
        let mut out = SpinorField::zero(&self.grid, self.dim);
        for term in &self.terms {
            let mut derived = source.clone();
            for &axis in &term.deriv {
                derived = derived.partial(axis as usize);
            }
            let pts = self.grid.num_points();
            for p in 0..pts {
                let x = &derived.data()[p * self.dim..(p + 1) * self.dim];
                let y = &mut out.data_mut()[p * self.dim..(p + 1) * self.dim];
                term.coeff.apply_at(p, x, y);
            }
        }
        out
    }

    /// Merges equal multi-indices and drops exactly-zero coefficients.
    pub fn canonicalize(&mut self) {
        let mut merged: BTreeMap<Vec<u8>, MatrixField> = BTreeMap::new();
        for term in self.terms.drain(..) {
            match merged.entry(term.deriv.clone()) {
                std::collections::btree_map::Entry::Vacant(v) => {
                    v.insert(term.coeff);
                }
                std::collections::btree_map::Entry::Occupied(mut o) => {
                    let sum = o.get().add(&term.coeff);
                    *o.get_mut() = sum;
                }
            }
        }
        self.terms = merged
            .into_iter()
            .filter(|(_, coeff)| coeff.max_abs() > 0.0)
            .map(|(deriv, coeff)| OpTerm { coeff, deriv })
            .collect();
    }

    pub fn add(&self, other: &SpinorOperator) -> Self {
        assert_eq!(self.antilinear, other.antilinear, "cannot add mixed linearity");
        assert!(self.grid.same_grid(&other.grid));
        let mut terms = self.terms.clone();
        terms.extend(other.terms.iter().cloned());
        SpinorOperator::from_terms(&self.grid, self.dim, terms, self.antilinear)
    }

    pub fn sub(&self, other: &SpinorOperator) -> Self {
        self.add(&other.scale(Complex64::new(-1.0, 0.0)))
    }

    pub fn scale(&self, z: Complex64) -> Self {
        let terms = self
            .terms
            .iter()
            .map(|t| OpTerm {
                coeff: t.coeff.scale(z),
                deriv: t.deriv.clone(),
            })
            .collect();
        SpinorOperator {
            grid: self.grid.clone(),
            dim: self.dim,
            antilinear: self.antilinear,
            terms,
        }
    }

    /// Distributes the derivative multi-index `alpha` over `(coeff, beta)`
    /// by the product rule.
    fn distribute(
        grid: &TorusGrid,
        alpha: &[u8],
        coeff: MatrixField,
        beta: Vec<u8>,
    ) -> Vec<(MatrixField, Vec<u8>)> {
        let mut parts = vec![(coeff, beta)];
        for &axis in alpha {
            let mut next = Vec::with_capacity(parts.len() * 2);
            for (m, b) in parts {
                let dm = m.partial(grid, axis as usize);
                if dm.max_abs() > 0.0 {
                    next.push((dm, b.clone()));
                }
                let mut b2 = b;
                b2.push(axis);
                b2.sort_unstable();
                next.push((m, b2));
            }
            parts = next;
        }
        parts
    }

    /// Operator composition `self . other` (apply `other` first).
    pub fn compose(&self, other: &SpinorOperator) -> Result<SpinorOperator> {
        self.grid.check_same(&other.grid)?;
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch("operator dimensions differ".into()));
        }
        let rhs_terms: Vec<OpTerm> = if self.antilinear {
            other
                .terms
                .iter()
                .map(|t| OpTerm {
                    coeff: t.coeff.conj(),
                    deriv: t.deriv.clone(),
                })
                .collect()
        } else {
            other.terms.clone()
        };
        let mut terms = Vec::new();
        for ta in &self.terms {
            for tb in &rhs_terms {
                for (m, beta) in Self::distribute(
                    &self.grid,
                    &ta.deriv,
                    tb.coeff.clone(),
                    tb.deriv.clone(),
                ) {
                    if beta.len() > MAX_DERIV_ORDER {
                        return Err(Error::OrderOverflow {
                            max: MAX_DERIV_ORDER,
                        });
                    }
                    terms.push(OpTerm {
                        coeff: ta.coeff.mul(&m),
                        deriv: beta,
                    });
                }
            }
        }
        Ok(SpinorOperator::from_terms(
            &self.grid,
            self.dim,
            terms,
            self.antilinear ^ other.antilinear,
        ))
    }

    /// L2 adjoint via integration by parts,
    /// `(M d^alpha)^dag = (-1)^|alpha| d^alpha M^dag` expanded to canonical
    /// form. Only defined for linear operators.
    pub fn adjoint(&self) -> Result<SpinorOperator> {
        if self.antilinear {
            return Err(Error::InvalidArgument(
                "adjoint of an antilinear operator is not used by the suite".into(),
            ));
        }
        let mut terms = Vec::new();
        for t in &self.terms {
            let sign = if t.deriv.len() % 2 == 0 { 1.0 } else { -1.0 };
            for (m, beta) in
                Self::distribute(&self.grid, &t.deriv, t.coeff.adjoint(), vec![])
            {
                terms.push(OpTerm {
                    coeff: m.scale(Complex64::new(sign, 0.0)),
                    deriv: beta,
                });
            }
        }
        Ok(SpinorOperator::from_terms(
            &self.grid,
            self.dim,
            terms,
            false,
        ))
    }

    /// Keeps only terms up to `max_order`, first checking that everything
    /// above is below `tol`.
    pub fn trim_to_order(&self, max_order: usize, tol: f64, what: &str) -> Result<SpinorOperator> {
        let mut dev: f64 = 0.0;
        for t in &self.terms {
            if t.deriv.len() > max_order {
                dev = dev.max(t.coeff.max_abs());
            }
        }
        ensure_identity(what, dev, tol)?;
        let terms = self
            .terms
            .iter()
            .filter(|t| t.deriv.len() <= max_order)
            .cloned()
            .collect();
        Ok(SpinorOperator {
            grid: self.grid.clone(),
            dim: self.dim,
            antilinear: self.antilinear,
            terms,
        })
    }

    /// Max canonical-coefficient deviation between two operators of the
    /// same linearity.
    pub fn term_dev(&self, other: &SpinorOperator) -> f64 {
        assert_eq!(self.antilinear, other.antilinear);
        let mut derivs: Vec<Vec<u8>> = self.terms.iter().map(|t| t.deriv.clone()).collect();
        for t in &other.terms {
            if !derivs.contains(&t.deriv) {
                derivs.push(t.deriv.clone());
            }
        }
        let mut dev: f64 = 0.0;
        for d in derivs {
            dev = dev.max(self.coeff_for(&d).max_abs_diff(&other.coeff_for(&d)));
        }
        dev
    }

    /// Max deviation of `(self - other) psi` over a battery of fields.
    pub fn apply_dev(&self, other: &SpinorOperator, battery: &[SpinorField]) -> f64 {
        battery
            .iter()
            .map(|psi| self.apply(psi).max_abs_diff(&other.apply(psi)))
            .fold(0.0, f64::max)
    }

    /// Largest coefficient modulus across terms.
    pub fn max_coeff(&self) -> f64 {
        self.terms.iter().map(|t| t.coeff.max_abs()).fold(0.0, f64::max)
    }

    /// Deterministic JSON summary of the term structure (matrix-field
    /// content hashes, derivative orders, antilinearity).
    pub fn summary_json(&self) -> String {
        fn hash_field(m: &MatrixField) -> u64 {
            // FNV-1a over the coefficient bit patterns
            let mut h: u64 = 0xcbf29ce484222325;
            let mut eat = |bits: u64| {
                for byte in bits.to_le_bytes() {
                    h ^= byte as u64;
                    h = h.wrapping_mul(0x100000001b3);
                }
            };
            match m {
                MatrixField::Constant { mat, .. } => {
                    for z in mat.iter() {
                        eat(z.re.to_bits());
                        eat(z.im.to_bits());
                    }
                }
                MatrixField::PerPoint { data, .. } => {
                    for z in data.iter() {
                        eat(z.re.to_bits());
                        eat(z.im.to_bits());
                    }
                }
            }
            h
        }
        let mut out = String::from("{\"antilinear\":");
        out.push_str(if self.antilinear { "true" } else { "false" });
        out.push_str(",\"terms\":[");
        for (i, t) in self.terms.iter().enumerate() {
            if i > 0 {
                out.push(',');
            }
            out.push_str(&format!(
                "{{\"deriv\":{:?},\"constant\":{},\"coeff_hash\":\"{:016x}\"}}",
                t.deriv.iter().map(|&d| d as usize).collect::<Vec<_>>(),
                t.coeff.is_constant(),
                hash_field(&t.coeff)
            ));
        }
        out.push_str("]}");
        out
    }
}
