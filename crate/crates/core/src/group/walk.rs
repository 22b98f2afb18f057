use std::collections::BTreeMap;

use super::{Element, GroupContext, GroupError};

/// A finitely supported probability measure on group elements, viewed as
/// the law of a random walk started at `basepoint`.
#[derive(Clone, Debug, PartialEq)]
pub struct WalkMeasure {
    basepoint: Element,
    masses: BTreeMap<Element, f64>,
}

impl WalkMeasure {
    pub fn dirac(x: Element) -> Self {
        let mut masses = BTreeMap::new();
        masses.insert(x.clone(), 1.0);
        WalkMeasure {
            basepoint: x,
            masses,
        }
    }

    pub fn from_masses(basepoint: Element, masses: BTreeMap<Element, f64>) -> Self {
        WalkMeasure { basepoint, masses }
    }

    pub fn basepoint(&self) -> &Element {
        &self.basepoint
    }

    pub fn masses(&self) -> &BTreeMap<Element, f64> {
        &self.masses
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Element, f64)> {
        self.masses.iter().map(|(g, &p)| (g, p))
    }

    pub fn mass(&self, g: &Element) -> f64 {
        self.masses.get(g).copied().unwrap_or(0.0)
    }

    pub fn support_len(&self) -> usize {
        self.masses.len()
    }

    pub fn total_mass(&self) -> f64 {
        self.masses.values().sum()
    }

    /// Checks nonnegativity and unit total mass.
    pub fn is_probability(&self, tol: f64) -> bool {
        self.masses.values().all(|&p| p >= 0.0) && (self.total_mass() - 1.0).abs() <= tol
    }

    /// The same walk started at `x`: `mu(x -> x g) = mu(basepoint -> basepoint g)`.
    pub fn translate(&self, ctx: &GroupContext, x: &Element) -> Result<WalkMeasure, GroupError> {
        let shift = ctx.multiply(x, &ctx.inverse(&self.basepoint)?)?;
        let mut masses = BTreeMap::new();
        for (g, &p) in &self.masses {
            *masses.entry(ctx.multiply(&shift, g)?).or_insert(0.0) += p;
        }
        Ok(WalkMeasure {
            basepoint: x.clone(),
            masses,
        })
    }

    /// Total-variation distance `1/2 sum |p - q|`.
    pub fn tv_distance(&self, other: &WalkMeasure) -> f64 {
        let mut sum = 0.0;
        for (g, &p) in &self.masses {
            sum += (p - other.mass(g)).abs();
        }
        for (g, &q) in &other.masses {
            if !self.masses.contains_key(g) {
                sum += q;
            }
        }
        0.5 * sum
    }

    /// Largest word length (relative to the basepoint) carrying mass.
    pub fn radius(&self, ctx: &GroupContext) -> Result<usize, GroupError> {
        let back = ctx.inverse(&self.basepoint)?;
        let mut r = 0;
        for g in self.masses.keys() {
            r = r.max(ctx.word_length(&ctx.multiply(&back, g)?)?);
        }
        Ok(r)
    }
}
