use std::f64::consts::TAU;

use rand::Rng;

/// Moves a node horizontally by `speed * dt` in a random direction,
/// reflecting off the sides of the deployment volume. Depth never changes.
pub fn mobility_step<R: Rng + ?Sized>(
    position: [f64; 3],
    dt: f64,
    speed: f64,
    area: [f64; 3],
    rng: &mut R,
) -> [f64; 3] {
    if speed == 0.0 || dt == 0.0 {
        return position;
    }
    let heading = rng.random_range(0.0..TAU);
    let step = speed * dt;
    let mut next = position;
    next[0] = reflect(position[0] + step * heading.cos(), area[0]);
    next[1] = reflect(position[1] + step * heading.sin(), area[1]);
    next
}

/// Folds `x` back into `[0, limit]` as if bouncing off both walls.
fn reflect(x: f64, limit: f64) -> f64 {
    let period = 2.0 * limit;
    let mut y = x.rem_euclid(period);
    if y > limit {
        y = period - y;
    }
    y
}
