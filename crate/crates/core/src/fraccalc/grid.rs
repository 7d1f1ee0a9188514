//! Graded grids and sampled complex functions on one edge.

use crate::{Complex64, Error, Result};

/// Fractional order, restricted to the open interval (0, 1).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FracOrder(f64);

impl FracOrder {
    pub fn new(alpha: f64) -> Result<Self> {
        if alpha.is_finite() && alpha > 0.0 && alpha < 1.0 {
            Ok(Self(alpha))
        } else {
            Err(Error::InvalidOrder(alpha))
        }
    }

    #[inline]
    pub fn alpha(self) -> f64 {
        self.0
    }
}

/// Which endpoint of an edge an annotation or limit refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum EndpointSide {
    /// The coordinate origin x = 0.
    AtZero,
    /// The far end x = L.
    AtLength,
}

impl EndpointSide {
    /// Distance from `x` to this endpoint of an edge of length `length`.
    #[inline]
    pub fn distance(self, x: f64, length: f64) -> f64 {
        match self {
            EndpointSide::AtZero => x,
            EndpointSide::AtLength => length - x,
        }
    }
}

/// One-sided limit estimate at an endpoint.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EndpointLimit {
    pub side: EndpointSide,
    pub value: Complex64,
}

/// Ordered nodes on [0, L], clustered toward both endpoints.
///
/// The default construction places `x_i = (L/2)(2i/n)^g` on the first half
/// and mirrors it exactly onto the second half, so the grid is symmetric
/// under reflection at the bit level. Grading `g = 1` gives a uniform grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    nodes: Vec<f64>,
    grading: f64,
    symmetric: bool,
}

/// Smallest number of cells a grid may have.
pub const MIN_CELLS: usize = 8;

impl Grid {
    /// Symmetric two-sided graded grid with `n_cells` cells (`n_cells + 1`
    /// nodes). `n_cells` is rounded up to an even count.
    pub fn graded(n_cells: usize, length: f64, grading: f64) -> Result<Self> {
        if !(length.is_finite() && length > 0.0) {
            return Err(Error::InvalidGrid(format!(
                "edge length must be positive, got {length}"
            )));
        }
        if !(grading.is_finite() && grading >= 1.0) {
            return Err(Error::InvalidGrid(format!(
                "grading exponent must be >= 1, got {grading}"
            )));
        }
        if n_cells < MIN_CELLS {
            return Err(Error::InvalidGrid(format!(
                "need at least {MIN_CELLS} cells, got {n_cells}"
            )));
        }
        let n = n_cells + n_cells % 2;
        let mut nodes = vec![0.0; n + 1];
        for (i, node) in nodes.iter_mut().enumerate().take(n / 2 + 1) {
            *node = 0.5 * length * (2.0 * i as f64 / n as f64).powf(grading);
        }
        for i in n / 2 + 1..=n {
            nodes[i] = length - nodes[n - i];
        }
        nodes[n] = length;
        Ok(Self {
            nodes,
            grading,
            symmetric: true,
        })
    }

    /// Grid from explicit nodes; must start at 0, increase strictly and end
    /// at the edge length.
    pub fn from_nodes(nodes: Vec<f64>) -> Result<Self> {
        if nodes.len() < MIN_CELLS + 1 {
            return Err(Error::InvalidGrid(format!(
                "need at least {} nodes, got {}",
                MIN_CELLS + 1,
                nodes.len()
            )));
        }
        if nodes[0] != 0.0 {
            return Err(Error::InvalidGrid("first node must be 0".into()));
        }
        if !nodes.windows(2).all(|w| w[1] > w[0]) {
            return Err(Error::InvalidGrid("nodes must increase strictly".into()));
        }
        if !nodes.last().unwrap().is_finite() {
            return Err(Error::InvalidGrid("nodes must be finite".into()));
        }
        Ok(Self {
            nodes,
            grading: 1.0,
            symmetric: false,
        })
    }

    #[inline]
    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        false
    }

    #[inline]
    pub fn n_cells(&self) -> usize {
        self.nodes.len() - 1
    }

    #[inline]
    pub fn length(&self) -> f64 {
        *self.nodes.last().unwrap()
    }

    #[inline]
    pub fn grading(&self) -> f64 {
        self.grading
    }

    /// Grid of the reflected coordinate x -> L - x.
    ///
    /// Symmetric grids reflect onto themselves exactly, which is what makes
    /// right-sided quadrature weights bit-identical to reflected left-sided
    /// ones.
    pub fn reflected(&self) -> Self {
        if self.symmetric {
            return self.clone();
        }
        let length = self.length();
        let n = self.n_cells();
        let mut nodes: Vec<f64> = self.nodes.iter().rev().map(|&x| length - x).collect();
        nodes[0] = 0.0;
        nodes[n] = length;
        Self {
            nodes,
            grading: self.grading,
            symmetric: false,
        }
    }

    /// Indices of nodes inside the interior window [lo*L, hi*L].
    pub fn interior_indices(&self, lo: f64, hi: f64) -> Vec<usize> {
        let length = self.length();
        self.nodes
            .iter()
            .enumerate()
            .filter(|(_, &x)| x >= lo * length && x <= hi * length)
            .map(|(i, _)| i)
            .collect()
    }
}

/// A power-law endpoint term `coefficient * d^exponent`, where `d` is the
/// distance to the annotated endpoint.
///
/// Exponents lie in (-1, 0): the term is unbounded but integrable. Storing
/// the coefficient instead of an infinite sample keeps downstream algebra
/// exact.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SingularTerm {
    pub side: EndpointSide,
    pub exponent: f64,
    pub coefficient: Complex64,
}

/// A sampled complex function on a grid, with optional singular endpoint
/// annotations.
///
/// Convention: `values[i]` holds the full function value at interior nodes.
/// At an endpoint node whose side carries singular terms, the stored value is
/// the finite remainder (the annotated power terms excluded). Globally,
/// `f(x) = sum(term.coefficient * d(x)^term.exponent) + regular(x)`.
#[derive(Debug, Clone, PartialEq)]
pub struct GridFunction {
    grid: Grid,
    values: Vec<Complex64>,
    singular: Vec<SingularTerm>,
}

impl GridFunction {
    pub fn new(grid: Grid, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::LengthMismatch {
                values: values.len(),
                nodes: grid.len(),
            });
        }
        Ok(Self {
            grid,
            values,
            singular: Vec::new(),
        })
    }

    pub fn zeros(grid: Grid) -> Self {
        let n = grid.len();
        Self {
            grid,
            values: vec![Complex64::new(0.0, 0.0); n],
            singular: Vec::new(),
        }
    }

    /// Sample a scalar real function at the grid nodes.
    pub fn from_fn(grid: Grid, f: impl Fn(f64) -> f64) -> Self {
        let values = grid.nodes().iter().map(|&x| Complex64::new(f(x), 0.0)).collect();
        Self {
            grid,
            values,
            singular: Vec::new(),
        }
    }

    /// Sample a complex function at the grid nodes.
    pub fn from_complex_fn(grid: Grid, f: impl Fn(f64) -> Complex64) -> Self {
        let values = grid.nodes().iter().map(|&x| f(x)).collect();
        Self {
            grid,
            values,
            singular: Vec::new(),
        }
    }

    #[inline]
    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    #[inline]
    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    #[inline]
    pub(crate) fn values_mut(&mut self) -> &mut [Complex64] {
        &mut self.values
    }

    #[inline]
    pub fn singular_terms(&self) -> &[SingularTerm] {
        &self.singular
    }

    pub fn singular_terms_at(&self, side: EndpointSide) -> impl Iterator<Item = &SingularTerm> {
        self.singular.iter().filter(move |t| t.side == side)
    }

    /// Net singular coefficient at one side for a given exponent.
    pub fn singular_coefficient(&self, side: EndpointSide, exponent: f64) -> Complex64 {
        self.singular
            .iter()
            .filter(|t| t.side == side && (t.exponent - exponent).abs() < 1e-12)
            .map(|t| t.coefficient)
            .sum()
    }

    /// Trace value at an endpoint: the pointwise value for bounded sides, the
    /// dominant singular coefficient where the function is annotated.
    pub fn trace(&self, side: EndpointSide) -> Complex64 {
        let mut terms: Vec<&SingularTerm> = self.singular_terms_at(side).collect();
        if terms.is_empty() {
            match side {
                EndpointSide::AtZero => self.values[0],
                EndpointSide::AtLength => *self.values.last().unwrap(),
            }
        } else {
            // Most negative exponent dominates the limit.
            terms.sort_by(|a, b| a.exponent.partial_cmp(&b.exponent).unwrap());
            terms[0].coefficient
        }
    }

    /// Add a singular endpoint term, merging with an existing term of the
    /// same side and exponent.
    pub fn push_singular(&mut self, term: SingularTerm) {
        debug_assert!(term.exponent > -1.0 && term.exponent < 0.0);
        if term.coefficient.norm() == 0.0 {
            return;
        }
        for existing in &mut self.singular {
            if existing.side == term.side && (existing.exponent - term.exponent).abs() < 1e-12 {
                existing.coefficient += term.coefficient;
                return;
            }
        }
        self.singular.push(term);
        self.singular.sort_by(|a, b| {
            (a.side as u8, a.exponent)
                .partial_cmp(&(b.side as u8, b.exponent))
                .unwrap()
        });
    }

    /// Values with all singular terms evaluated and subtracted; at annotated
    /// endpoint nodes the stored (already regular) value is kept.
    pub fn regular_values(&self) -> Vec<Complex64> {
        if self.singular.is_empty() {
            return self.values.clone();
        }
        let length = self.grid.length();
        let last = self.grid.len() - 1;
        let mut out = self.values.clone();
        for term in &self.singular {
            for (i, &x) in self.grid.nodes().iter().enumerate() {
                let d = term.side.distance(x, length);
                let endpoint_node = match term.side {
                    EndpointSide::AtZero => i == 0,
                    EndpointSide::AtLength => i == last,
                };
                if !endpoint_node {
                    out[i] -= term.coefficient * d.powf(term.exponent);
                }
            }
        }
        out
    }

    /// Full sample values with singular terms evaluated at every node except
    /// the annotated endpoints (where the regular value is kept, since the
    /// term is infinite there).
    pub fn full_values(&self) -> Vec<Complex64> {
        self.values.clone()
    }

    /// Pointwise sum. Grids must match; singular terms merge.
    pub fn add(&self, other: &GridFunction) -> Result<GridFunction> {
        self.zip_with(other, |a, b| a + b)
    }

    /// Pointwise difference. Grids must match; singular terms merge negated.
    pub fn sub(&self, other: &GridFunction) -> Result<GridFunction> {
        let mut out = self.clone();
        if other.grid != self.grid {
            return Err(Error::GraphFunctionMismatch(
                "grid mismatch in grid-function arithmetic".into(),
            ));
        }
        for (a, b) in out.values.iter_mut().zip(&other.values) {
            *a -= b;
        }
        for term in &other.singular {
            out.push_singular(SingularTerm {
                coefficient: -term.coefficient,
                ..*term
            });
        }
        Ok(out)
    }

    fn zip_with(
        &self,
        other: &GridFunction,
        f: impl Fn(Complex64, Complex64) -> Complex64,
    ) -> Result<GridFunction> {
        if other.grid != self.grid {
            return Err(Error::GraphFunctionMismatch(
                "grid mismatch in grid-function arithmetic".into(),
            ));
        }
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(&a, &b)| f(a, b))
            .collect();
        let mut out = GridFunction {
            grid: self.grid.clone(),
            values,
            singular: self.singular.clone(),
        };
        for term in &other.singular {
            out.push_singular(*term);
        }
        Ok(out)
    }

    /// Scale by a complex constant.
    pub fn scale(&self, c: Complex64) -> GridFunction {
        GridFunction {
            grid: self.grid.clone(),
            values: self.values.iter().map(|&v| c * v).collect(),
            singular: self
                .singular
                .iter()
                .map(|t| SingularTerm {
                    coefficient: c * t.coefficient,
                    ..*t
                })
                .filter(|t| t.coefficient.norm() != 0.0)
                .collect(),
        }
    }

    /// Reflected function on the reflected grid: g(x) = f(L - x).
    pub fn reflected(&self) -> GridFunction {
        let grid = self.grid.reflected();
        let values = self.values.iter().rev().copied().collect();
        let singular = self
            .singular
            .iter()
            .map(|t| SingularTerm {
                side: match t.side {
                    EndpointSide::AtZero => EndpointSide::AtLength,
                    EndpointSide::AtLength => EndpointSide::AtZero,
                },
                ..*t
            })
            .collect();
        GridFunction {
            grid,
            values,
            singular,
        }
    }

    /// Add the power term `coefficient * d^exponent` measured from `side`.
    ///
    /// Exponents must exceed -1 so the term stays integrable. Negative
    /// exponents are recorded as a singular annotation and evaluated into the
    /// interior samples; the annotated endpoint keeps its regular value.
    pub fn add_power_term(
        &mut self,
        side: EndpointSide,
        coefficient: Complex64,
        exponent: f64,
    ) -> Result<()> {
        if exponent.is_nan() || exponent <= -1.0 {
            return Err(Error::UnsupportedSingularity(format!(
                "power term with exponent {exponent} is not integrable"
            )));
        }
        let length = self.grid.length();
        let last = self.grid.len() - 1;
        if exponent < 0.0 {
            for i in 0..=last {
                let skip = match side {
                    EndpointSide::AtZero => i == 0,
                    EndpointSide::AtLength => i == last,
                };
                if !skip {
                    let d = side.distance(self.grid.nodes()[i], length);
                    self.values[i] += coefficient * d.powf(exponent);
                }
            }
            self.push_singular(SingularTerm {
                side,
                exponent,
                coefficient,
            });
        } else {
            for i in 0..=last {
                let d = side.distance(self.grid.nodes()[i], length);
                self.values[i] += coefficient * d.powf(exponent);
            }
        }
        Ok(())
    }

    /// Max-norm of the sampled values over the given node indices.
    pub fn max_norm_at(&self, indices: &[usize]) -> f64 {
        indices
            .iter()
            .map(|&i| self.values[i].norm())
            .fold(0.0, f64::max)
    }
}
