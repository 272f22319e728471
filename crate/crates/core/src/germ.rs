//! Polynomial map germs and their basic invariants: order, rank, first
//! homogeneous part, and the graph map `x -> (x, f(x))`.

use num_traits::Zero;

use crate::error::{GermError, Result};
use crate::matrix::{jacobian_of, rational_rank, PolyMatrix};
use crate::poly::{default_var_names, Polynomial};

/// A polynomial map germ `K^n, 0 -> K^p, 0`. Every component vanishes at 0.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct MapGerm {
    nvars: usize,
    components: Vec<Polynomial>,
}

impl MapGerm {
    pub fn new(nvars: usize, components: Vec<Polynomial>) -> Result<Self> {
        if components.is_empty() {
            return Err(GermError::structural(
                "a map germ needs at least one component",
            ));
        }
        for (i, c) in components.iter().enumerate() {
            if c.nvars() != nvars {
                return Err(GermError::structural(format!(
                    "component {i} has {} variables, expected {nvars}",
                    c.nvars()
                )));
            }
            if !c.constant_term().is_zero() {
                return Err(GermError::NotAGerm { component: i });
            }
        }
        Ok(MapGerm { nvars, components })
    }

    pub fn identity(nvars: usize) -> Self {
        MapGerm {
            nvars,
            components: (0..nvars).map(|i| Polynomial::var(nvars, i)).collect(),
        }
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    /// Number of components `p`.
    pub fn ncomps(&self) -> usize {
        self.components.len()
    }

    pub fn components(&self) -> &[Polynomial] {
        &self.components
    }

    pub fn into_components(self) -> Vec<Polynomial> {
        self.components
    }

    pub fn is_zero(&self) -> bool {
        self.components.iter().all(Polynomial::is_zero)
    }

    pub fn degree(&self) -> u32 {
        self.components
            .iter()
            .filter_map(Polynomial::degree)
            .max()
            .unwrap_or(0)
    }

    pub fn jacobian(&self) -> PolyMatrix {
        jacobian_of(&self.components, self.nvars).expect("components share nvars")
    }

    /// Lowest total degree over all components.
    pub fn order(&self) -> Result<u32> {
        self.components
            .iter()
            .filter_map(Polynomial::order)
            .min()
            .ok_or_else(|| {
                GermError::Undefined("order undefined (infinite) for the zero map".into())
            })
    }

    /// Rank over Q of the Jacobian at the origin.
    pub fn rank(&self) -> usize {
        rational_rank(&self.jacobian().at_origin())
    }

    /// Componentwise degree-`order(f)` part. Components may come out zero.
    pub fn first_homogeneous_part(&self) -> Result<MapGerm> {
        let k = self.order()?;
        Ok(MapGerm {
            nvars: self.nvars,
            components: self
                .components
                .iter()
                .map(|c| c.homogeneous_component(k))
                .collect(),
        })
    }

    /// `F(x) = (x, f(x))`, a germ in the same `n` variables with `n + p` components.
    pub fn graph_map(&self) -> MapGerm {
        let mut components: Vec<Polynomial> = (0..self.nvars)
            .map(|i| Polynomial::var(self.nvars, i))
            .collect();
        components.extend(self.components.iter().cloned());
        MapGerm {
            nvars: self.nvars,
            components,
        }
    }

    /// `f o phi`, where `phi` has one component per variable of `f`.
    pub fn compose(&self, phi: &MapGerm) -> Result<MapGerm> {
        if phi.ncomps() != self.nvars {
            return Err(GermError::structural(format!(
                "cannot compose a germ in {} variables with a map with {} components",
                self.nvars,
                phi.ncomps()
            )));
        }
        let components = self
            .components
            .iter()
            .map(|c| c.compose(&phi.components))
            .collect::<Result<Vec<_>>>()?;
        MapGerm::new(phi.nvars, components)
    }

    /// Double-precision evaluation.
    pub fn eval_f64(&self, x: &[f64]) -> Vec<f64> {
        self.components.iter().map(|c| c.eval_f64(x)).collect()
    }

    pub fn to_strings(&self, names: &[String]) -> Vec<String> {
        self.components
            .iter()
            .map(|c| c.to_string_with(names))
            .collect()
    }

    pub fn display_strings(&self) -> Vec<String> {
        self.to_strings(&default_var_names(self.nvars))
    }
}
