use super::binning::BinningScheme;
use super::round::RoundRecord;

/// Result of public sifting. Indices refer to positions in the transcript.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SiftedKey {
    pub rounds: Vec<usize>,
    pub alice: Vec<u32>,
    pub bob: Vec<u32>,
    pub discarded: Vec<usize>,
}

impl SiftedKey {
    pub fn len(&self) -> usize {
        self.rounds.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rounds.is_empty()
    }

    pub fn agreement(&self) -> f64 {
        if self.is_empty() {
            return f64::NAN;
        }
        let same = self.alice.iter().zip(&self.bob).filter(|(a, b)| a == b).count();
        same as f64 / self.len() as f64
    }
}

/// Keeps exactly the records marked `kept`.
pub fn sift(transcript: &[RoundRecord], binning: &BinningScheme) -> SiftedKey {
    let mut key = SiftedKey::default();
    for (i, rec) in transcript.iter().enumerate() {
        match (rec.kept, rec.bob_bin) {
            (true, Some(bob_bin)) => {
                key.rounds.push(i);
                key.alice.push(binning.symbol(rec.alice_bin));
                key.bob.push(binning.symbol(bob_bin));
            }
            _ => key.discarded.push(i),
        }
    }
    key
}
