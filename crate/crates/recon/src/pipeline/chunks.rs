use std::ops::Range;

use gauss4d_core::{Error, Result};

/// One chunk: the frames fed to the model and the frames it is the first to
/// cover. Ranges are 0-based and half-open.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Chunk {
    pub input: Range<usize>,
    pub new: Range<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ChunkPlan {
    pub frames: usize,
    pub chunk_len: usize,
    pub chunks: Vec<Chunk>,
}

/// Chunk `k` starts at `k(T−1)`, so consecutive chunks share one frame; a
/// final chunk that would run past `L` is right-aligned to end at `L`.
pub fn plan_chunks(frames: usize, chunk_len: usize) -> Result<ChunkPlan> {
    if frames == 0 {
        return Err(Error::invalid("plan_chunks needs at least one frame"));
    }
    if chunk_len < 2 {
        return Err(Error::invalid("chunk length must be >= 2"));
    }
    let mut chunks = Vec::new();
    let mut covered = 0;
    let mut k = 0;
    while covered < frames {
        let mut start = k * (chunk_len - 1);
        if start + chunk_len > frames {
            start = frames.saturating_sub(chunk_len);
        }
        let end = (start + chunk_len).min(frames);
        chunks.push(Chunk {
            input: start..end,
            new: covered..end,
        });
        covered = end;
        k += 1;
    }
    Ok(ChunkPlan {
        frames,
        chunk_len,
        chunks,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn one_based(plan: &ChunkPlan) -> Vec<(usize, usize)> {
        plan.chunks.iter().map(|c| (c.input.start + 1, c.input.end)).collect()
    }

    #[test]
    fn sixty_four_by_sixteen() {
        let plan = plan_chunks(64, 16).unwrap();
        assert_eq!(one_based(&plan), vec![(1, 16), (16, 31), (31, 46), (46, 61), (49, 64)]);
        assert_eq!(plan.chunks[4].new, 61..64);
    }

    #[test]
    fn small_cases() {
        assert_eq!(one_based(&plan_chunks(8, 8).unwrap()), vec![(1, 8)]);
        assert_eq!(one_based(&plan_chunks(9, 8).unwrap()), vec![(1, 8), (2, 9)]);
        assert_eq!(one_based(&plan_chunks(15, 8).unwrap()), vec![(1, 8), (8, 15)]);
        assert_eq!(one_based(&plan_chunks(3, 8).unwrap()), vec![(1, 3)]);
        assert!(plan_chunks(0, 8).is_err());
        assert!(plan_chunks(5, 1).is_err());
    }

    #[test]
    fn covers_every_frame_once() {
        for t in [2, 4, 8, 16] {
            for l in t..=200 {
                let plan = plan_chunks(l, t).unwrap();
                let mut owner = vec![0usize; l];
                for c in &plan.chunks {
                    assert_eq!(c.input.len(), t);
                    for f in c.new.clone() {
                        owner[f] += 1;
                    }
                }
                assert!(owner.iter().all(|&n| n == 1), "L={l} T={t}");
                for w in plan.chunks.windows(2) {
                    assert!(w[1].input.start < w[0].input.end, "chunks must overlap");
                    if w[1].input.end < l {
                        assert_eq!(w[1].input.start + 1, w[0].input.end);
                    }
                }
                assert_eq!(plan.chunks[0].new, 0..t);
            }
        }
    }
}
