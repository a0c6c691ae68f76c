use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{Bounds, Point};

/// Mobility state of an idle UE.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MobilityClass {
    Stationary,
    Low,
    High,
}

impl MobilityClass {
    pub const ALL: [MobilityClass; 3] = [MobilityClass::Stationary, MobilityClass::Low, MobilityClass::High];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn name(self) -> &'static str {
        match self {
            MobilityClass::Stationary => "stationary",
            MobilityClass::Low => "low",
            MobilityClass::High => "high",
        }
    }
}

/// Speeds per mobility class and the random-walk step.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MobilityModel {
    /// km/h for stationary, low and high mobility.
    pub speeds_kmh: [f64; 3],
}

impl Default for MobilityModel {
    fn default() -> Self {
        Self {
            speeds_kmh: [0.0, 3.0, 30.0],
        }
    }
}

impl MobilityModel {
    pub fn speed_mps(&self, class: MobilityClass) -> f64 {
        self.speeds_kmh[class.index()] * 1000.0 / 3600.0
    }

    /// One random-walk step of `dt` seconds: a fresh uniform heading, a
    /// straight move of `speed * dt`, then reflection off the bounds.
    /// Stationary UEs do not move and draw nothing from `rng`.
    pub fn step<R: Rng + ?Sized>(
        &self,
        position: Point,
        class: MobilityClass,
        dt: f64,
        bounds: &Bounds,
        rng: &mut R,
    ) -> Point {
        let distance = self.speed_mps(class) * dt;
        if distance == 0.0 {
            return position;
        }
        let heading = rng.random_range(0.0..std::f64::consts::TAU);
        Point::new(
            reflect(position.x + distance * heading.cos(), bounds.min_x, bounds.max_x),
            reflect(position.y + distance * heading.sin(), bounds.min_y, bounds.max_y),
        )
    }
}

fn reflect(mut v: f64, lo: f64, hi: f64) -> f64 {
    // loop covers steps longer than the whole span
    loop {
        if v > hi {
            v = 2.0 * hi - v;
        } else if v < lo {
            v = 2.0 * lo - v;
        } else {
            return v;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::TrackingArea;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn step_lengths() {
        let m = MobilityModel::default();
        let b = TrackingArea::build().bounds();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let p = Point::new(10.0, -20.0);
        assert_eq!(m.step(p, MobilityClass::Stationary, 0.32, &b, &mut rng), p);
        let q = m.step(p, MobilityClass::Low, 0.32, &b, &mut rng);
        assert!((p.distance(&q) - 3000.0 / 3600.0 * 0.32).abs() < 1e-12);
        assert!((p.distance(&q) - 0.2667).abs() < 1e-4);
        let q = m.step(p, MobilityClass::High, 0.32, &b, &mut rng);
        assert!((p.distance(&q) - 2.6667).abs() < 1e-4);
    }

    #[test]
    fn reflection_folds_back() {
        assert_eq!(reflect(105.0, -100.0, 100.0), 95.0);
        assert_eq!(reflect(-103.0, -100.0, 100.0), -97.0);
        assert_eq!(reflect(530.0, -100.0, 100.0), 70.0);
    }

    proptest! {
        #[test]
        fn walk_stays_in_bounds(seed in any::<u64>(), x in -400.0f64..=400.0, y in -400.0f64..=400.0, steps in 1usize..200) {
            let m = MobilityModel { speeds_kmh: [0.0, 3.0, 3000.0] };
            let b = TrackingArea::build().bounds();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut p = Point::new(x, y);
            for _ in 0..steps {
                p = m.step(p, MobilityClass::High, 0.32, &b, &mut rng);
                prop_assert!(b.contains(&p));
            }
        }
    }
}
