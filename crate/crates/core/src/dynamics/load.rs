use serde::{Deserialize, Serialize};

use crate::types::Vec3;

/// Ground load acting on one foot.
///
/// `reaction` is the force the ground applies to the foot and `free_moment`
/// the couple it applies about the centre of pressure; `r` runs from the COP
/// to the toe (the distal end of the foot segment).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExternalLoad {
    pub reaction: Vec3,
    pub free_moment: Vec3,
    pub cop: Vec3,
    pub r: Vec3,
}

impl ExternalLoad {
    /// Load applied at `cop` on a foot whose toe is at `toe`.
    pub fn new(reaction: Vec3, free_moment: Vec3, cop: Vec3, toe: Vec3) -> Self {
        ExternalLoad {
            reaction,
            free_moment,
            cop,
            r: toe - cop,
        }
    }

    /// No ground contact: all load terms zero.
    pub fn swing() -> Self {
        ExternalLoad {
            reaction: Vec3::zeros(),
            free_moment: Vec3::zeros(),
            cop: Vec3::zeros(),
            r: Vec3::zeros(),
        }
    }

    pub fn is_swing(&self) -> bool {
        self.reaction == Vec3::zeros() && self.free_moment == Vec3::zeros()
    }

    /// Sagittal reduction: keep only the Y component of the free moment.
    pub fn sagittal(mut self) -> Self {
        self.free_moment = Vec3::new(0.0, self.free_moment.y, 0.0);
        self
    }

    /// `F_G` as used by the closed forms: the force the foot applies to the ground.
    pub fn f_g(&self) -> Vec3 {
        -self.reaction
    }

    /// `M_G` as used by the closed forms.
    pub fn m_g(&self) -> Vec3 {
        self.free_moment
    }
}

/// Transfer a ground force and moment from the COP to the toe:
/// `F_D = F_G`, `M_D = M_G - r x F_G`.
pub fn transfer_to_distal(f_g: &Vec3, m_g: &Vec3, r: &Vec3) -> (Vec3, Vec3) {
    (*f_g, m_g - r.cross(f_g))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn transfer_examples() {
        let z = Vec3::zeros();
        assert_eq!(transfer_to_distal(&z, &z, &Vec3::new(0.3, 0.1, 0.0)), (z, z));
        let (f, m) = transfer_to_distal(&Vec3::new(0.0, 0.0, 100.0), &z, &Vec3::new(0.1, 0.0, 0.0));
        assert_eq!(f, Vec3::new(0.0, 0.0, 100.0));
        assert!((m - Vec3::new(0.0, 10.0, 0.0)).norm() < 1e-12);
        let mg = Vec3::new(1.0, 2.0, 3.0);
        assert_eq!(transfer_to_distal(&Vec3::new(5.0, 0.0, 9.0), &mg, &z).1, mg);
    }

    #[test]
    fn toe_vector() {
        let l = ExternalLoad::new(Vec3::z(), Vec3::zeros(), Vec3::new(0.1, 0.0, 0.0), Vec3::new(0.25, 0.0, 0.02));
        assert!((l.r - Vec3::new(0.15, 0.0, 0.02)).norm() < 1e-15);
        assert!(ExternalLoad::swing().is_swing());
        assert!(!l.is_swing());
    }
}
