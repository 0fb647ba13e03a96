// Units are tiles and ticks. y grows downward; row 0 is the top of the scene.

/// Tunable constants of the forward model.
///
/// The defaults are tuned so that, with a player 0.8 tiles wide:
/// a standing tap jump clears a 1-tile step and a 2-tile gap,
/// a walking full-hold jump clears a 4-tile wall,
/// a running full-hold jump clears a 6-tile gap but not an 8-tile gap,
/// and a jump held for at most 2 extra ticks peaks below 2.5 tiles.
#[derive(Debug, Clone, PartialEq)]
pub struct PhysicsConfig {
    pub gravity: f64,
    pub max_fall_speed: f64,
    pub walk_max_speed: f64,
    pub run_max_speed: f64,
    pub walk_accel: f64,
    pub run_accel: f64,
    /// Deceleration with no horizontal input.
    pub friction: f64,
    pub jump_impulse: f64,
    /// Extra ticks the jump button can sustain the take-off velocity.
    pub jump_hold_ticks: u32,
    pub stomp_bounce: f64,

    pub player_width: f64,
    pub small_height: f64,
    pub big_height: f64,
    pub spawn_x: f64,
    pub invulnerable_ticks: u32,

    pub enemy_speed: f64,
    pub enemy_width: f64,
    pub enemy_height: f64,
    pub winged_hop: f64,
    pub shell_speed: f64,
    pub shell_height: f64,
    /// Ticks after a kick during which the shell cannot hurt the kicker.
    pub kick_grace: u32,
    pub mushroom_speed: f64,
    /// Slack when deciding whether a contact came from above.
    pub stomp_tolerance: f64,

    /// Apex above take-off that counts as a high jump.
    pub high_jump_height: f64,
    /// Horizontal take-off to landing distance that counts as a long jump.
    pub long_jump_distance: f64,
    /// Hold extension beyond which the high-jump punishment triggers.
    pub punished_hold_ticks: u32,
}

impl Default for PhysicsConfig {
    fn default() -> Self {
        PhysicsConfig {
            gravity: 0.09,
            max_fall_speed: 0.9,
            walk_max_speed: 0.15,
            run_max_speed: 0.30,
            walk_accel: 0.03,
            run_accel: 0.05,
            friction: 0.03,
            jump_impulse: 0.45,
            jump_hold_ticks: 7,
            stomp_bounce: 0.35,

            player_width: 0.8,
            small_height: 0.9,
            big_height: 1.8,
            spawn_x: 1.5,
            invulnerable_ticks: 30,

            enemy_speed: 0.06,
            enemy_width: 0.8,
            enemy_height: 0.9,
            winged_hop: 0.4,
            shell_speed: 0.35,
            shell_height: 0.8,
            kick_grace: 8,
            mushroom_speed: 0.08,
            stomp_tolerance: 0.25,

            high_jump_height: 2.5,
            long_jump_distance: 4.0,
            punished_hold_ticks: 4,
        }
    }
}

impl PhysicsConfig {
    /// Lower bound on ticks needed to cover `distance` tiles starting at
    /// horizontal speed `vx`, accelerating as hard as the physics allow.
    pub fn min_ticks_to_cover(&self, distance: f64, vx: f64) -> f64 {
        self.min_ticks_at(distance, vx, self.run_max_speed, self.run_accel)
    }

    /// As [`min_ticks_to_cover`](Self::min_ticks_to_cover) for a player
    /// limited to top speed `vmax` and acceleration `accel`.
    pub fn min_ticks_at(&self, distance: f64, vx: f64, vmax: f64, accel: f64) -> f64 {
        if distance <= 0.0 {
            return 0.0;
        }
        let mut v = vx.max(0.0);
        let mut covered = 0.0;
        let mut ticks = 0.0;
        while v < vmax {
            let next = (v + accel).min(vmax);
            if covered + next >= distance {
                return ticks + (distance - covered) / next;
            }
            covered += next;
            ticks += 1.0;
            v = next;
        }
        ticks + (distance - covered) / vmax
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn min_ticks_at_top_speed_is_distance_over_speed() {
        let p = PhysicsConfig::default();
        assert!((p.min_ticks_to_cover(3.0, 0.3) - 10.0).abs() < 1e-12);
        assert_eq!(p.min_ticks_to_cover(-1.0, 0.0), 0.0);
    }

    #[test]
    fn min_ticks_never_exceeds_resting_bound() {
        let p = PhysicsConfig::default();
        for d in [0.01, 0.3, 1.0, 2.5, 18.5] {
            let from_rest = p.min_ticks_to_cover(d, 0.0);
            let moving = p.min_ticks_to_cover(d, 0.2);
            assert!(moving <= from_rest);
            // Never faster than travelling at top speed the whole way.
            assert!(from_rest >= d / p.run_max_speed - 1e-12);
        }
    }
}
