//! Cones of directions along which points of an outer polyhedron project onto
//! a given point of an inner polytope.

use std::collections::BTreeSet;

use nalgebra::DVector;

use super::cone::ConvexCone;
use super::polyhedron::{Polyhedron, ACTIVE_TOL};
use crate::error::{Error, Result};

/// `T_p(outer) ∩ N_p(inner)`.
pub fn pushover_cone(outer: &Polyhedron, inner: &Polyhedron, p: &DVector<f64>) -> Result<ConvexCone> {
    let t = outer.tangent_cone(p)?;
    let n = inner.normal_cone(p)?;
    t.intersect(&n)
}

/// One member of the union: the cone shared by a relatively open face of the inner set.
#[derive(Clone, Debug)]
pub struct PushoverMember {
    /// Barycenter of the face's vertices.
    pub base: DVector<f64>,
    /// Indices into the inner vertex list spanning the face.
    pub face_vertices: Vec<usize>,
    pub outer_active: Vec<usize>,
    pub inner_active: Vec<usize>,
    pub cone: ConvexCone,
}

#[derive(Clone, Debug)]
pub struct UnionOfCones {
    pub members: Vec<PushoverMember>,
    pub inner_vertices: Vec<DVector<f64>>,
}

impl UnionOfCones {
    pub fn contains(&self, v: &DVector<f64>, tol: f64) -> bool {
        self.members.iter().any(|m| m.cone.contains(v, tol))
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }
}

/// Face lattice of a polytope from the active sets of its vertices.
pub fn polytope_faces(p: &Polyhedron, vertices: &[DVector<f64>]) -> Vec<(BTreeSet<usize>, Vec<usize>)> {
    let act: Vec<BTreeSet<usize>> = vertices
        .iter()
        .map(|v| p.active_set(v, ACTIVE_TOL).into_iter().collect())
        .collect();
    let mut family: BTreeSet<BTreeSet<usize>> = act.iter().cloned().collect();
    loop {
        let cur: Vec<_> = family.iter().cloned().collect();
        let mut grew = false;
        for i in 0..cur.len() {
            for j in i + 1..cur.len() {
                let s: BTreeSet<usize> = cur[i].intersection(&cur[j]).cloned().collect();
                if family.insert(s) {
                    grew = true;
                }
            }
        }
        if !grew {
            break;
        }
    }
    family
        .into_iter()
        .map(|s| {
            let vs = (0..vertices.len()).filter(|&k| s.is_subset(&act[k])).collect();
            (s, vs)
        })
        .collect()
}

/// `D(outer | inner)`: one member per distinct active-set signature over the inner polytope.
pub fn pushover_union(outer: &Polyhedron, inner: &Polyhedron) -> Result<UnionOfCones> {
    let vertices = inner.vertices()?;
    if vertices.is_empty() {
        return Err(Error::EmptyConstraintSet);
    }
    if let Some(v) = vertices.iter().find(|v| !outer.contains(v, 1e-7)) {
        return Err(Error::InvalidInput(format!(
            "inner vertex {:?} lies outside the outer set",
            v.as_slice()
        )));
    }
    let mut seen: BTreeSet<(Vec<usize>, Vec<usize>)> = BTreeSet::new();
    let mut members = Vec::new();
    for (_, vs) in polytope_faces(inner, &vertices) {
        if vs.is_empty() {
            continue;
        }
        let mut base = DVector::zeros(inner.dim());
        for &k in &vs {
            base += &vertices[k];
        }
        base /= vs.len() as f64;
        let oa = outer.active_set(&base, ACTIVE_TOL);
        let ia = inner.active_set(&base, ACTIVE_TOL);
        if !seen.insert((oa.clone(), ia.clone())) {
            continue;
        }
        let cone = outer.tangent_cone_for(&oa).intersect(&inner.normal_cone_for(&ia))?;
        members.push(PushoverMember {
            base,
            face_vertices: vs,
            outer_active: oa,
            inner_active: ia,
            cone,
        });
    }
    Ok(UnionOfCones {
        members,
        inner_vertices: vertices,
    })
}
