//! Stranger-side state: a profile vector and a request policy.

use rand::Rng;
use rand_chacha::ChaCha12Rng;

use super::ProtocolError;
use crate::attributes::AttributeVector;

/// Whether an agent answers a capture notice with a blur request.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Policy {
    Always,
    Never,
    /// Requests with the given probability, drawn from the shared policy
    /// stream. 0 never requests, 1 always does.
    WithProbability(f64),
}

impl Policy {
    pub fn validate(&self) -> Result<(), ProtocolError> {
        if let Self::WithProbability(p) = self {
            if !(0.0..=1.0).contains(p) {
                return Err(ProtocolError::BadPolicyProbability(*p));
            }
        }
        Ok(())
    }
}

/// A nearby person running the app: their precomputed profile vector (from
/// the base photo) and their request policy.
#[derive(Debug, Clone, PartialEq)]
pub struct StrangerAgent {
    pub id: String,
    pub profile: AttributeVector,
    pub policy: Policy,
}

impl StrangerAgent {
    pub fn new(
        id: impl Into<String>,
        profile: AttributeVector,
        policy: Policy,
    ) -> Result<Self, ProtocolError> {
        policy.validate()?;
        Ok(Self {
            id: id.into(),
            profile,
            policy,
        })
    }

    /// Reaction to a capture notice: the profile to send, or nothing.
    /// Only probabilistic policies consume randomness.
    pub fn on_notice(&self, policy_rng: &mut ChaCha12Rng) -> Option<AttributeVector> {
        match self.policy {
            Policy::Always => Some(self.profile.clone()),
            Policy::Never => None,
            Policy::WithProbability(p) => {
                let draw: f64 = policy_rng.random();
                (draw < p).then(|| self.profile.clone())
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::attributes::AttributeSchema;
    use rand::SeedableRng;

    fn agent(policy: Policy) -> StrangerAgent {
        let profile = AttributeVector::all_positive(AttributeSchema::default_schema());
        StrangerAgent::new("a", profile, policy).unwrap()
    }

    #[test]
    fn always_and_never() {
        let mut rng = ChaCha12Rng::seed_from_u64(0);
        assert!(agent(Policy::Always).on_notice(&mut rng).is_some());
        assert!(agent(Policy::Never).on_notice(&mut rng).is_none());
    }

    #[test]
    fn probability_boundaries() {
        let mut rng = ChaCha12Rng::seed_from_u64(0);
        let zero = agent(Policy::WithProbability(0.0));
        for _ in 0..100 {
            assert!(zero.on_notice(&mut rng).is_none());
        }
        let one = agent(Policy::WithProbability(1.0));
        for _ in 0..100 {
            assert!(one.on_notice(&mut rng).is_some());
        }
    }

    #[test]
    fn probability_validated() {
        assert!(Policy::WithProbability(1.5).validate().is_err());
        assert!(Policy::WithProbability(-0.1).validate().is_err());
        assert!(Policy::WithProbability(0.5).validate().is_ok());
    }
}
