//! Brute-force reference implementations shared by the integration tests.
//! Nothing here calls into the pipeline except to read plain data.
#![allow(dead_code)]

/// The 12-point worked example and its 0-based states.
pub const EX1: [f64; 12] = [12., 85., 45., 18., 78., 42., 15., 22., 55., 48., 82., 91.];
pub const EX1_STATES: [usize; 12] = [0, 2, 1, 0, 2, 1, 0, 0, 1, 1, 2, 2];

/// Local matrices of the two six-step chunks, as printed in the worked example.
pub fn ex2_locals() -> Vec<Vec<Vec<f64>>> {
    vec![
        vec![vec![0., 0., 1.], vec![1., 0., 0.], vec![0., 1., 0.]],
        vec![vec![0.5, 0.5, 0.], vec![0., 0.5, 0.5], vec![0., 0., 1.]],
    ]
}

/// Small deterministic generator (SplitMix64) for test inputs.
pub struct TestRng(u64);

impl TestRng {
    pub fn new(seed: u64) -> Self {
        Self(seed)
    }

    pub fn next_u64(&mut self) -> u64 {
        self.0 = self.0.wrapping_add(0x9e37_79b9_7f4a_7c15);
        let mut z = self.0;
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
        z ^ (z >> 31)
    }

    pub fn uniform(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 / (1u64 << 53) as f64
    }

    pub fn range(&mut self, lo: usize, hi_inclusive: usize) -> usize {
        lo + (self.next_u64() % (hi_inclusive - lo + 1) as u64) as usize
    }

    /// Values on a 0.1 grid in [-100, 100]; ties are possible.
    pub fn grid_series(&mut self, len: usize) -> Vec<f64> {
        (0..len)
            .map(|_| self.range(0, 2000) as f64 / 10.0 - 100.0)
            .collect()
    }
}

/// Rank of each observation under (value, index) order, by direct counting.
pub fn naive_ranks(x: &[f64]) -> Vec<usize> {
    (0..x.len())
        .map(|t| {
            (0..x.len())
                .filter(|&s| x[s] < x[t] || (x[s] == x[t] && s < t))
                .count()
        })
        .collect()
}

/// Equal-count states: cut ranks into blocks, larger blocks first.
pub fn naive_states(x: &[f64], bins: usize) -> Vec<usize> {
    let len = x.len();
    let mut bounds = Vec::new();
    let mut acc = 0;
    for k in 0..bins {
        acc += len / bins + if k < len % bins { 1 } else { 0 };
        bounds.push(acc);
    }
    naive_ranks(x)
        .into_iter()
        .map(|r| bounds.iter().position(|&b| r < b).unwrap())
        .collect()
}

/// Chunk index of every step, by walking the chunk sizes.
pub fn naive_chunk_of(len: usize, chunks: usize) -> Vec<usize> {
    let mut out = Vec::with_capacity(len);
    for k in 0..chunks {
        let size = len / chunks + if k < len % chunks { 1 } else { 0 };
        for _ in 0..size {
            out.push(k);
        }
    }
    out
}

/// Counts pairs (t, t+1) inside `[start, end)`, one cell at a time.
pub fn naive_counts(b: &[usize], bins: usize, start: usize, end: usize) -> Vec<Vec<u64>> {
    let mut c = vec![vec![0u64; bins]; bins];
    for (k, row) in c.iter_mut().enumerate() {
        for (l, cell) in row.iter_mut().enumerate() {
            for t in start..end.saturating_sub(1) {
                if b[t] == k && b[t + 1] == l {
                    *cell += 1;
                }
            }
        }
    }
    c
}

/// Per-chunk matrices with uniform rows where a state never leaves.
pub fn naive_locals(b: &[usize], bins: usize, chunk_of: &[usize]) -> Vec<Vec<Vec<f64>>> {
    let chunks = chunk_of.iter().max().unwrap() + 1;
    (0..chunks)
        .map(|c| {
            let start = chunk_of.iter().position(|&k| k == c).unwrap();
            let end = chunk_of.iter().rposition(|&k| k == c).unwrap() + 1;
            naive_counts(b, bins, start, end)
                .into_iter()
                .map(|row| {
                    let total: u64 = row.iter().sum();
                    if total == 0 {
                        vec![1.0 / bins as f64; bins]
                    } else {
                        row.iter().map(|&n| n as f64 / total as f64).collect()
                    }
                })
                .collect()
        })
        .collect()
}

/// Triple-loop assembly: for each (i, j), scan destination states until b_j.
pub fn naive_field(b: &[usize], chunk_of: &[usize], mats: &[Vec<Vec<f64>>]) -> Vec<f64> {
    let len = b.len();
    let mut out = vec![f64::NAN; len * len];
    for i in 0..len {
        let w = &mats[chunk_of[i]];
        for j in 0..len {
            for (l, &p) in w[b[i]].iter().enumerate() {
                if l == b[j] {
                    out[i * len + j] = p;
                }
            }
        }
    }
    out
}

pub fn bits(v: &[f64]) -> Vec<u64> {
    v.iter().map(|x| x.to_bits()).collect()
}
