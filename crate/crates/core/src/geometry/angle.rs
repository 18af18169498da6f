use std::f64::consts::FRAC_PI_2;

use nalgebra::DMatrix;

use super::cone::{ConvexCone, CONE_TOL};
use super::sphere::max_quadratic;
use super::subspace::Subspace;
use crate::error::Result;

/// `inf` of the angle between nonzero members of a cone and a subspace; `pi/2` if either is `{0}`.
pub fn angle_to_subspace(c: &ConvexCone, s: &Subspace) -> Result<f64> {
    if s.dim() == 0 || c.is_trivial()? {
        return Ok(FRAC_PI_2);
    }
    let q = s.projector();
    let best = max_quadratic(c, &q)?.expect("nontrivial cone has a unit member");
    Ok(best.value.clamp(0.0, 1.0).sqrt().acos())
}

/// Angle between two cones.
pub fn cone_angle(a: &ConvexCone, b: &ConvexCone) -> Result<f64> {
    if a.is_trivial()? || b.is_trivial()? {
        return Ok(FRAC_PI_2);
    }
    if b.is_subspace()? {
        return angle_to_subspace(a, &b.lineality()?);
    }
    if a.is_subspace()? {
        return angle_to_subspace(b, &a.lineality()?);
    }
    let fa = a.face_subspaces()?;
    let fb = b.face_subspaces()?;
    let mut best = f64::NEG_INFINITY;
    for la in fa.iter() {
        for lb in fb.iter() {
            let m = la.transpose() * lb;
            let (r, c) = m.shape();
            let s = r.max(c);
            let mut sq = DMatrix::zeros(s, s);
            sq.view_mut((0, 0), (r, c)).copy_from(&m);
            let svd = sq.svd(true, true);
            let u = svd.u.unwrap();
            let vt = svd.v_t.unwrap();
            let left: Vec<_> = (0..s).map(|i| u.column(i).rows(0, r).into_owned()).collect();
            let right: Vec<_> = (0..s).map(|i| vt.row(i).transpose().rows(0, c).into_owned()).collect();
            for i in 0..s {
                let mut pairs = vec![(i, i)];
                if svd.singular_values[i] <= 1e-12 {
                    for j in 0..s {
                        if svd.singular_values[j] <= 1e-12 {
                            pairs.push((i, j));
                        }
                    }
                }
                for (p, q) in pairs {
                    let (x, y) = (&left[p], &right[q]);
                    if x.norm() < 1e-9 || y.norm() < 1e-9 {
                        continue;
                    }
                    let ua = la * x / x.norm();
                    let ub = lb * y / y.norm();
                    for sa in [1.0, -1.0] {
                        for sb in [1.0, -1.0] {
                            let (pa, pb) = (&ua * sa, &ub * sb);
                            if a.contains(&pa, CONE_TOL) && b.contains(&pb, CONE_TOL) {
                                best = best.max(pa.dot(&pb));
                            }
                        }
                    }
                }
            }
        }
    }
    Ok(best.clamp(-1.0, 1.0).acos())
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::DVector;

    fn v(x: &[f64]) -> DVector<f64> {
        DVector::from_column_slice(x)
    }

    #[test]
    fn angle_properties() {
        let c = ConvexCone::from_generators(3, vec![v(&[1.0, 0.0, 0.0]), v(&[1.0, 1.0, 0.0])], DMatrix::zeros(3, 0));
        assert!(cone_angle(&c, &c).unwrap().abs() < 1e-7);
        assert_eq!(cone_angle(&c, &ConvexCone::zero(3)).unwrap(), FRAC_PI_2);
        let line = ConvexCone::from_subspace(&Subspace::span_of(3, &[v(&[0.0, 0.0, 1.0])]));
        assert!((cone_angle(&c, &line).unwrap() - FRAC_PI_2).abs() < 1e-12);
        let d = ConvexCone::from_generators(3, vec![v(&[0.0, 1.0, 1.0])], DMatrix::zeros(3, 0));
        let ab = cone_angle(&c, &d).unwrap();
        let ba = cone_angle(&d, &c).unwrap();
        assert!((ab - ba).abs() < 1e-12);
        // closest pair: (1,1,0)/sqrt2 and (0,1,1)/sqrt2, cosine 1/2
        assert!((ab - std::f64::consts::FRAC_PI_3).abs() < 1e-12);
    }

    #[test]
    fn opposite_rays() {
        let a = ConvexCone::from_generators(2, vec![v(&[1.0, 0.0])], DMatrix::zeros(2, 0));
        let b = ConvexCone::from_generators(2, vec![v(&[-1.0, 0.0])], DMatrix::zeros(2, 0));
        assert!((cone_angle(&a, &b).unwrap() - std::f64::consts::PI).abs() < 1e-12);
    }
}
