//! Game parameters and the per-round dynamics: donation, reward and resource update.

use std::fmt;

use crate::error::{Error, Result};

/// Relative tolerance used when comparing rewards.
pub const REWARD_EPS: f64 = 1e-9;

/// All tunable constants of the iterated volunteer's dilemma.
#[derive(Debug, Clone, PartialEq)]
pub struct GameParams {
    /// Number of players.
    pub n: usize,
    /// Number of rounds played before the game stops.
    pub k_max: u32,
    /// Resources every player starts with.
    pub r_init: u32,
    /// Total donation needed to win a round.
    pub r_needed: u32,
    /// Per-player resource cap.
    pub r_max: u32,
    /// Reward scaling factor.
    pub f: f64,
    /// Linear penalty per unit of over-donation.
    pub decay_slope: f64,
    /// Donation fractions available to every player, strictly ascending in `[0, 1]`.
    pub fractions: Vec<f64>,
}

impl Default for GameParams {
    fn default() -> Self {
        GameParams {
            n: 3,
            k_max: 4,
            r_init: 100,
            r_needed: 200,
            r_max: 1000,
            f: 2.0,
            decay_slope: -0.014,
            fractions: vec![0.0, 0.5, 1.0],
        }
    }
}

impl GameParams {
    /// Checks every parameter invariant, returning the parameters unchanged on success.
    pub fn validated(self) -> Result<Self> {
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidParams(msg));
        if self.n == 0 {
            return bad("player count must be positive".into());
        }
        if self.k_max == 0 {
            return bad("k_max must be positive".into());
        }
        if self.r_needed == 0 {
            return bad("r_needed must be positive".into());
        }
        if self.r_max == 0 {
            return bad("r_max must be positive".into());
        }
        if u64::from(self.r_needed) >= self.n as u64 * u64::from(self.r_max) {
            return bad(format!(
                "r_needed ({}) must be below n * r_max ({})",
                self.r_needed,
                self.n as u64 * u64::from(self.r_max)
            ));
        }
        if self.r_init > self.r_max {
            return bad(format!(
                "r_init ({}) exceeds r_max ({})",
                self.r_init, self.r_max
            ));
        }
        if !(self.f.is_finite() && self.f > 0.0) {
            return bad(format!("scaling factor f must be positive, got {}", self.f));
        }
        if !self.decay_slope.is_finite() {
            return bad("decay_slope must be finite".into());
        }
        if self.fractions.is_empty() {
            return bad("fractions must not be empty".into());
        }
        for &x in &self.fractions {
            if !(0.0..=1.0).contains(&x) {
                return bad(format!("fraction {x} outside [0, 1]"));
            }
        }
        if self.fractions.windows(2).any(|w| w[0] >= w[1]) {
            return bad("fractions must be strictly ascending".into());
        }
        Ok(())
    }

    /// Number of actions available to a single player.
    pub fn action_count(&self) -> usize {
        self.fractions.len()
    }

    /// Number of joint actions, `|fractions|^n`.
    pub fn joint_action_count(&self) -> usize {
        self.action_count().pow(self.n as u32)
    }

    /// Round index carried by terminal states.
    /// Display name of a fraction index: `a` followed by the donated percentage.
    pub fn action_name(&self, index: usize) -> String {
        format!("a{}", (self.fractions[index] * 100.0).round() as i64)
    }

    pub fn terminal_round(&self) -> u32 {
        self.k_max + 1
    }

    pub fn initial_state(&self) -> GameState {
        GameState::new(1, vec![self.r_init; self.n])
    }
}

/// Round counter plus per-player resources. Equal `(k, c)` pairs are the same state.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct GameState {
    pub k: u32,
    pub c: Vec<u32>,
}

impl GameState {
    pub fn new(k: u32, c: Vec<u32>) -> Self {
        GameState { k, c }
    }

    pub fn total(&self) -> u64 {
        self.c.iter().map(|&x| u64::from(x)).sum()
    }
}

impl fmt::Display for GameState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "k={} c=[", self.k)?;
        for (i, c) in self.c.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{c}")?;
        }
        f.write_str("]")
    }
}

/// One fraction index per player.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct JointAction {
    pub choice: Vec<usize>,
}

impl JointAction {
    pub fn new(choice: Vec<usize>) -> Self {
        JointAction { choice }
    }

    /// Decodes a joint-action index. Player 1 is the most significant digit, so index
    /// order is lexicographic over the per-player choices.
    pub fn from_index(mut index: usize, n: usize, actions: usize) -> Self {
        let mut choice = vec![0; n];
        for slot in choice.iter_mut().rev() {
            *slot = index % actions;
            index /= actions;
        }
        JointAction { choice }
    }

    pub fn index(&self, actions: usize) -> usize {
        self.choice.iter().fold(0, |acc, &a| acc * actions + a)
    }

    /// Iterates every joint action in index order.
    pub fn all(n: usize, actions: usize) -> impl Iterator<Item = JointAction> {
        (0..actions.pow(n as u32)).map(move |i| JointAction::from_index(i, n, actions))
    }

    pub fn validate(&self, params: &GameParams) -> Result<()> {
        if self.choice.len() != params.n {
            return Err(Error::InvalidAction(format!(
                "expected {} choices, got {}",
                params.n,
                self.choice.len()
            )));
        }
        if let Some(&bad) = self.choice.iter().find(|&&a| a >= params.action_count()) {
            return Err(Error::InvalidAction(format!(
                "fraction index {bad} out of range (have {})",
                params.action_count()
            )));
        }
        Ok(())
    }
}

/// Everything that happens in one round given a state and a joint action.
#[derive(Debug, Clone, PartialEq)]
pub struct RoundOutcome {
    pub donations: Vec<u32>,
    pub total_donated: u64,
    pub won: bool,
    pub per_agent_reward: f64,
    pub next_resources: Vec<u32>,
}

/// Resources donated when giving `fraction` of `c_i`, rounded down.
pub fn donation_amount(c_i: u32, fraction: f64) -> u32 {
    let d = (fraction * f64::from(c_i)).floor() as u32;
    d.min(c_i)
}

/// Per-agent reward for a round in which `total_donated` resources were pooled.
///
/// Zero below the threshold, `r_needed * f / n` at the threshold, and decaying linearly with
/// slope `decay_slope / n` per unit of over-donation above it.
pub fn round_reward(total_donated: u64, params: &GameParams) -> f64 {
    let needed = u64::from(params.r_needed);
    let n = params.n as f64;
    let base = f64::from(params.r_needed) * params.f;
    match total_donated.cmp(&needed) {
        std::cmp::Ordering::Less => 0.0,
        std::cmp::Ordering::Equal => base / n,
        std::cmp::Ordering::Greater => {
            let excess = (total_donated - needed) as f64;
            (params.decay_slope * excess + base) / n
        }
    }
}

/// Group reward: the sum of the identical per-agent rewards.
pub fn aggregate_reward(per_agent_reward: f64, n: usize) -> f64 {
    n as f64 * per_agent_reward
}

/// Plays one round. Donations are spent whether or not the round is won; each player is then
/// credited `R / n` and capped at `r_max`.
pub fn apply_round(
    state: &GameState,
    action: &JointAction,
    params: &GameParams,
) -> Result<RoundOutcome> {
    if state.k > params.k_max {
        return Err(Error::TerminalState(state.k));
    }
    if state.c.len() != params.n {
        return Err(Error::InvalidState(format!(
            "state has {} players, params have {}",
            state.c.len(),
            params.n
        )));
    }
    action.validate(params)?;
    Ok(play(&state.c, action, params))
}

/// Unchecked round dynamics shared by the builder and [`apply_round`].
pub(crate) fn play(c: &[u32], action: &JointAction, params: &GameParams) -> RoundOutcome {
    let donations: Vec<u32> = c
        .iter()
        .zip(&action.choice)
        .map(|(&ci, &a)| donation_amount(ci, params.fractions[a]))
        .collect();
    let total_donated: u64 = donations.iter().map(|&d| u64::from(d)).sum();
    let per_agent_reward = round_reward(total_donated, params);
    let credit = aggregate_reward(per_agent_reward, params.n) / params.n as f64;
    let next_resources = c
        .iter()
        .zip(&donations)
        .map(|(&ci, &si)| {
            let raw = (f64::from(ci - si) + credit).floor();
            if raw <= 0.0 {
                0
            } else if raw >= f64::from(params.r_max) {
                params.r_max
            } else {
                raw as u32
            }
        })
        .collect();
    RoundOutcome {
        donations,
        total_donated,
        won: total_donated >= u64::from(params.r_needed),
        per_agent_reward,
        next_resources,
    }
}
