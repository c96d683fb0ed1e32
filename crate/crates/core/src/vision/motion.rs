use std::fmt;

use serde::{Deserialize, Serialize};

use super::cursor::CursorPoint;
use super::VisionConfig;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum MotionPattern {
    Static,
    LinearHorizontal,
    LinearVertical,
    Jump,
    None,
}

impl fmt::Display for MotionPattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            MotionPattern::Static => "Static",
            MotionPattern::LinearHorizontal => "LinearHorizontal",
            MotionPattern::LinearVertical => "LinearVertical",
            MotionPattern::Jump => "Jump",
            MotionPattern::None => "None",
        };
        f.write_str(s)
    }
}

/// Fraction of an axis' path length spent moving against its net direction.
fn backtrack(steps: &[f64]) -> f64 {
    let total: f64 = steps.iter().map(|s| s.abs()).sum();
    if total == 0.0 {
        return 0.0;
    }
    let net: f64 = steps.iter().sum();
    let against: f64 = steps.iter().filter(|s| s.signum() != net.signum()).map(|s| s.abs()).sum();
    against / total
}

/// Classifies a trajectory by its dominant displacement direction.
///
/// A single point is `Static`; `None` is reserved for empty trajectories.
pub fn classify_motion_pattern(points: &[CursorPoint], cfg: &VisionConfig) -> MotionPattern {
    match points.len() {
        0 => return MotionPattern::None,
        1 => return MotionPattern::Static,
        _ => {}
    }
    let max_disp = points
        .iter()
        .enumerate()
        .flat_map(|(i, p)| points[i + 1..].iter().map(move |q| (p.x - q.x).hypot(p.y - q.y)))
        .fold(0.0, f64::max);
    if max_disp < cfg.static_radius {
        return MotionPattern::Static;
    }
    let dx: Vec<f64> = points.windows(2).map(|w| w[1].x - w[0].x).collect();
    let dy: Vec<f64> = points.windows(2).map(|w| w[1].y - w[0].y).collect();
    let path_x: f64 = dx.iter().map(|v| v.abs()).sum();
    let path_y: f64 = dy.iter().map(|v| v.abs()).sum();
    let path = path_x + path_y;
    if path_x >= cfg.directionality * path && backtrack(&dx) <= cfg.max_backtrack {
        MotionPattern::LinearHorizontal
    } else if path_y >= cfg.directionality * path && backtrack(&dy) <= cfg.max_backtrack {
        MotionPattern::LinearVertical
    } else {
        MotionPattern::Jump
    }
}
