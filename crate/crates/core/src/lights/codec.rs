use std::fmt;
use std::str::FromStr;

use rand::Rng;

use super::{compute_t_max, EncodingParams, LightsError, LightsProgramme, PhaseWindow};
use crate::netmodel::{conflicting_tracks, RoadNetwork, TrackId};

/// Fixed-length bit string: `M` consecutive pairs of `n`-bit fields `(L, R)`,
/// most significant bit first within each field.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Chromosome(Vec<bool>);

impl Chromosome {
    pub fn from_bits(bits: Vec<bool>) -> Self {
        Self(bits)
    }

    pub fn zeros(len: usize) -> Self {
        Self(vec![false; len])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn bits(&self) -> &[bool] {
        &self.0
    }

    /// Unsigned value of `width` bits starting at `offset`, MSB first.
    pub fn field(&self, offset: usize, width: usize) -> u64 {
        self.0[offset..offset + width]
            .iter()
            .fold(0u64, |acc, &b| (acc << 1) | u64::from(b))
    }

    /// Writes `value` into `width` bits at `offset`, MSB first.
    pub fn set_field(&mut self, offset: usize, width: usize, value: u64) {
        for i in 0..width {
            self.0[offset + i] = (value >> (width - 1 - i)) & 1 == 1;
        }
    }

    /// Bits of `value` as a chromosome of `len` bits, MSB first.
    pub fn from_u64(value: u64, len: usize) -> Self {
        let mut c = Self::zeros(len);
        c.set_field(0, len, value);
        c
    }
}

impl fmt::Display for Chromosome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &b in &self.0 {
            f.write_str(if b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl FromStr for Chromosome {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        s.trim()
            .chars()
            .map(|c| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                other => Err(format!("invalid bit `{other}`")),
            })
            .collect::<Result<_, _>>()
            .map(Self)
    }
}

/// Encoding of one network's programmes: field width, per-track maximal
/// greens and the conflicting track pairs. Immutable and cheap to share.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProgrammeCodec {
    params: EncodingParams,
    bits: usize,
    /// Indexed by track id - 1.
    t_max: Vec<u32>,
    /// `(a, b)` with `a < b`, ascending.
    conflicts: Vec<(TrackId, TrackId)>,
}

impl ProgrammeCodec {
    /// Derives each track's maximal green from the number of tracks it conflicts with.
    pub fn new(params: EncodingParams, net: &RoadNetwork) -> Result<Self, LightsError> {
        params.check()?;
        let mut t_max = Vec::with_capacity(net.track_count());
        for track in 1..=net.track_count() {
            let k = conflicting_tracks(net, track)
                .map_err(|_| LightsError::UnknownTrack(track))?
                .len();
            let tm = compute_t_max(&params, k).map_err(|e| match e {
                LightsError::InfeasibleTrack { t_max, t_min, .. } => LightsError::InfeasibleTrack {
                    track: Some(track),
                    t_max,
                    t_min,
                },
                other => other,
            })?;
            t_max.push(tm);
        }
        Ok(Self {
            params,
            bits: params.bits_per_field() as usize,
            t_max,
            conflicts: net.conflicting_track_pairs(),
        })
    }

    /// Codec over explicit per-track limits, without a network.
    pub fn from_parts(
        params: EncodingParams,
        t_max: Vec<u32>,
        mut conflicts: Vec<(TrackId, TrackId)>,
    ) -> Result<Self, LightsError> {
        params.check()?;
        for (i, &tm) in t_max.iter().enumerate() {
            if tm < params.t_min {
                return Err(LightsError::InfeasibleTrack {
                    track: Some(i + 1),
                    t_max: i64::from(tm),
                    t_min: params.t_min,
                });
            }
        }
        for (a, b) in conflicts.iter_mut() {
            if *a > *b {
                std::mem::swap(a, b);
            }
            if *a == 0 || *b > t_max.len() {
                return Err(LightsError::UnknownTrack(*a.max(b)));
            }
        }
        conflicts.sort_unstable();
        conflicts.dedup();
        conflicts.retain(|(a, b)| a != b);
        Ok(Self {
            params,
            bits: params.bits_per_field() as usize,
            t_max,
            conflicts,
        })
    }

    pub fn params(&self) -> &EncodingParams {
        &self.params
    }

    pub fn track_count(&self) -> usize {
        self.t_max.len()
    }

    pub fn bits_per_field(&self) -> usize {
        self.bits
    }

    /// `2 * M * n`.
    pub fn chromosome_len(&self) -> usize {
        2 * self.track_count() * self.bits
    }

    pub fn t_max(&self, track: TrackId) -> Option<u32> {
        self.t_max.get(track.checked_sub(1)?).copied()
    }

    pub fn conflicts(&self) -> &[(TrackId, TrackId)] {
        &self.conflicts
    }

    /// Total decode: every bit pattern of the right length yields windows with
    /// `start < cycle_ticks` and `t_min <= green <= t_max`.
    pub fn decode(&self, chrom: &Chromosome) -> Result<LightsProgramme, LightsError> {
        if chrom.len() != self.chromosome_len() {
            return Err(LightsError::LengthMismatch {
                expected: self.chromosome_len(),
                found: chrom.len(),
            });
        }
        let n = self.bits;
        let cycle = u64::from(self.params.cycle_ticks);
        let t_min = self.params.t_min;
        let windows = self
            .t_max
            .iter()
            .enumerate()
            .map(|(i, &t_max)| {
                let l = chrom.field(2 * i * n, n);
                let r = chrom.field(2 * i * n + n, n);
                let span = u64::from(t_max - t_min) + 1;
                PhaseWindow {
                    track: i + 1,
                    start: (l % cycle) as u32,
                    green: t_min + (r % span) as u32,
                }
            })
            .collect();
        Ok(LightsProgramme {
            params: self.params,
            windows,
        })
    }
}

/// Decodes a chromosome against a network. See [`ProgrammeCodec::decode`].
pub fn decode(
    chrom: &Chromosome,
    params: &EncodingParams,
    net: &RoadNetwork,
) -> Result<LightsProgramme, LightsError> {
    ProgrammeCodec::new(*params, net)?.decode(chrom)
}

/// `2 * tracks * bits` independent fair bits.
pub fn random_chromosome<R: Rng + ?Sized>(tracks: usize, bits: usize, rng: &mut R) -> Chromosome {
    Chromosome((0..2 * tracks * bits).map(|_| rng.gen::<bool>()).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn zero_chromosome_decodes_to_minimal_greens_at_zero() {
        let codec =
            ProgrammeCodec::new(fixtures::grid_params(), &fixtures::grid_network()).unwrap();
        let prog = codec
            .decode(&Chromosome::zeros(codec.chromosome_len()))
            .unwrap();
        assert_eq!(prog.windows.len(), 12);
        for (i, w) in prog.windows.iter().enumerate() {
            assert_eq!(
                *w,
                PhaseWindow {
                    track: i + 1,
                    start: 0,
                    green: 25
                }
            );
        }
    }

    #[test]
    fn hand_evaluated_fields() {
        // cycle 300 -> n = 9; t_min 25, t_max 235.
        let params = EncodingParams::new(300, 25, 25, 15, 0).unwrap();
        let codec = ProgrammeCodec::from_parts(params, vec![235], vec![]).unwrap();
        let mut c = Chromosome::zeros(18);
        c.set_field(0, 9, 305);
        c.set_field(9, 9, 300);
        let w = codec.decode(&c).unwrap().windows[0];
        assert_eq!((w.start, w.green), (5, 114));
    }

    #[test]
    fn fields_are_msb_first() {
        let c: Chromosome = "1000".parse().unwrap();
        assert_eq!(c.field(0, 4), 8);
        assert_eq!(c.field(0, 1), 1);
        assert_eq!(Chromosome::from_u64(8, 4), c);
        assert_eq!(c.to_string(), "1000");
        assert!("10x".parse::<Chromosome>().is_err());
    }

    #[test]
    fn length_mismatch() {
        let codec = ProgrammeCodec::new(fixtures::crossing_params(), &fixtures::crossing_network())
            .unwrap();
        assert_eq!(
            codec.decode(&Chromosome::zeros(3)),
            Err(LightsError::LengthMismatch {
                expected: 16,
                found: 3
            })
        );
    }

    #[test]
    fn single_track_exhaustive() {
        // One track, k = 1: t_max = 16 - 2 - 2 = 12, 8-bit chromosome.
        let params = fixtures::crossing_params();
        let t_max = compute_t_max(&params, 1).unwrap();
        assert_eq!(t_max, 12);
        let codec = ProgrammeCodec::from_parts(params, vec![t_max], vec![]).unwrap();
        for v in 0..256u64 {
            let w = codec.decode(&Chromosome::from_u64(v, 8)).unwrap().windows[0];
            assert!(w.start < 16 && (2..=12).contains(&w.green), "{v}: {w:?}");
        }
    }

    #[test]
    fn infeasible_track_is_named() {
        let params = EncodingParams::new(20, 4, 2, 2, 0).unwrap();
        let net = fixtures::four_way_network();
        // Tracks in the four-way junction have five colliders each: 20 - 20 - 4 < 4.
        assert!(matches!(
            ProgrammeCodec::new(params, &net),
            Err(LightsError::InfeasibleTrack { track: Some(1), .. })
        ));
    }

    #[test]
    fn random_chromosomes_are_reproducible_and_fair() {
        let mut a = ChaCha8Rng::seed_from_u64(7);
        let mut b = ChaCha8Rng::seed_from_u64(7);
        assert_eq!(
            random_chromosome(3, 5, &mut a),
            random_chromosome(3, 5, &mut b)
        );
        assert_eq!(random_chromosome(1, 4, &mut a).len(), 8);

        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let mut ones = [0u32; 8];
        for _ in 0..10_000 {
            for (k, &bit) in random_chromosome(1, 4, &mut rng).bits().iter().enumerate() {
                ones[k] += u32::from(bit);
            }
        }
        for count in ones {
            let mean = f64::from(count) / 10_000.0;
            assert!((0.45..=0.55).contains(&mean), "{mean}");
        }
    }
}
