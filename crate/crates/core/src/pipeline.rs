//! Capacity, pushover union, Fisher matrix and `A` for one model and constraint.

use crate::capacity::{solve_capacity, CapacitySolution, SolverOptions};
use crate::constants::{
    a_coefficient, fisher_matrix, pushover_of, theorem1_constants, theorem2_constants, ACoefficient, FisherMatrix,
    Theorem1Constants, Theorem2Constants,
};
use crate::error::Result;
use crate::geometry::{Polyhedron, UnionOfCones};
use crate::model::InformationModel;

#[derive(Clone, Debug)]
pub struct Analysis<M: InformationModel> {
    pub solution: CapacitySolution<M>,
    pub union: UnionOfCones,
    pub fisher: FisherMatrix,
    pub a: ACoefficient,
}

impl<M: InformationModel> Analysis<M> {
    pub fn theorem1(&self, seed: u64) -> Result<Theorem1Constants> {
        theorem1_constants(&self.solution, &self.union, seed)
    }

    pub fn theorem2(&self, seed: u64) -> Result<Theorem2Constants> {
        theorem2_constants(&self.solution, &self.union, &self.fisher, &self.a, seed)
    }
}

pub fn analyze<M: InformationModel>(model: &M, lambda: &Polyhedron, opts: &SolverOptions) -> Result<Analysis<M>> {
    let solution = solve_capacity(model, lambda, opts)?;
    let union = pushover_of(&solution)?;
    let fisher = fisher_matrix(&solution.model, &solution.center);
    let a = a_coefficient(&solution.model, &solution.center, &fisher);
    Ok(Analysis {
        solution,
        union,
        fisher,
        a,
    })
}
