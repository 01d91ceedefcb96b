//! Volume kernel microbenchmarks: flux evaluation and FLOP counts, timings,
//! a bulk-copy bandwidth baseline and roofline estimates.

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Result, SweError};
use crate::kernels::{split_volume, standard_volume};
use crate::operators1d::Operators1D;
use crate::real::{self, Counted};

/// Bytes moved per node by a volume kernel: state in, metrics in, residual out.
pub const BYTES_PER_NODE: usize = 8 * (3 + 4 + 3);

const G: f64 = 9.81;
const H_DES: f64 = 1e-8;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct OpCounts {
    pub n: usize,
    pub k: usize,
    pub dofs: usize,
    pub evals_split: u64,
    pub evals_standard: u64,
    pub flops_split: u64,
    pub flops_standard: u64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct BenchRecord {
    pub counts: OpCounts,
    pub workers: usize,
    pub repetitions: usize,
    pub t_split_median: f64,
    pub t_split_mean: f64,
    pub t_standard_median: f64,
    pub t_standard_mean: f64,
    pub t_memcopy: f64,
    pub bytes: usize,
    pub bw_split: f64,
    pub bw_standard: f64,
    pub bw_memcopy: f64,
    pub roofline_split: f64,
    pub roofline_standard: f64,
}

impl BenchRecord {
    /// Split kernel seconds per million degrees of freedom.
    pub fn split_per_mdof(&self) -> f64 {
        self.t_split_median / (self.counts.dofs as f64 * 1e-6)
    }

    pub fn standard_per_mdof(&self) -> f64 {
        self.t_standard_median / (self.counts.dofs as f64 * 1e-6)
    }
}

pub fn dofs(n: usize, k: usize) -> usize {
    3 * k * (n + 1) * (n + 1)
}

/// Seeded wet field and metric directions for `k` elements of degree `n`.
/// The directions come from a mildly sheared affine map, so they are constant
/// per element.
pub fn bench_field(n: usize, k: usize, seed: u64) -> (Vec<[f64; 3]>, Vec<[f64; 4]>) {
    let nn = (n + 1) * (n + 1);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let w = (0..k * nn)
        .map(|_| {
            let h = rng.gen_range(0.5..1.5);
            [h, h * rng.gen_range(-0.5..0.5), h * rng.gen_range(-0.5..0.5)]
        })
        .collect();
    let dirs = vec![[0.5, -0.05, 0.0, 0.5]; k * nn];
    (w, dirs)
}

fn lift<const M: usize>(a: &[f64; M]) -> [Counted; M] {
    a.map(Counted)
}

/// Flux evaluation and FLOP counts for `k` elements of degree `n`. The FLOPs
/// are tallied by running the production kernels once on a single element
/// with the counting scalar, then scaled by `k`.
pub fn count_ops(n: usize, k: usize) -> Result<OpCounts> {
    if n < 1 {
        return Err(SweError::InvalidArgument("bench degree must be at least 1".into()));
    }
    let ops = Operators1D::new(n)?;
    let nn = (n + 1) * (n + 1);
    let (w, dirs) = bench_field(n, 1, 7);
    let wc: Vec<[Counted; 3]> = w.iter().map(lift).collect();
    let dc: Vec<[Counted; 4]> = dirs.iter().map(lift).collect();
    let dt: Vec<Counted> = ops.d_tilde.iter().copied().map(Counted).collect();
    let d: Vec<Counted> = ops.d.iter().copied().map(Counted).collect();
    let mut out = vec![[Counted(0.0); 3]; nn];

    real::reset_flops();
    let es = split_volume(n, &wc, &dc, &dt, Counted(G), Counted(H_DES), &mut out);
    let fs = real::flops();
    real::reset_flops();
    let ed = standard_volume(n, &wc, &dc, &d, Counted(G), Counted(H_DES), &mut out);
    let fd = real::flops();

    let k64 = k as u64;
    Ok(OpCounts {
        n,
        k,
        dofs: dofs(n, k),
        evals_split: es * k64,
        evals_standard: ed * k64,
        flops_split: fs * k64,
        flops_standard: fd * k64,
    })
}

fn median(v: &mut [f64]) -> f64 {
    v.sort_by(|a, b| a.total_cmp(b));
    let m = v.len() / 2;
    if v.len() % 2 == 1 {
        v[m]
    } else {
        0.5 * (v[m - 1] + v[m])
    }
}

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

/// Seconds for one bulk copy of `bytes / 2` bytes (each byte read once and
/// written once), median over `repetitions`.
pub fn memcopy_time(bytes: usize, repetitions: usize) -> f64 {
    let len = (bytes / 2).div_ceil(8).max(1);
    let src: Vec<f64> = (0..len).map(|i| i as f64).collect();
    let mut dst = vec![0.0f64; len];
    let mut times = Vec::with_capacity(repetitions.max(1));
    for _ in 0..repetitions.max(1) {
        let t0 = Instant::now();
        dst.copy_from_slice(&src);
        std::hint::black_box(&mut dst);
        times.push(t0.elapsed().as_secs_f64());
    }
    median(&mut times)
}

/// `(bytes read + bytes written) / t`.
pub fn effective_bandwidth(bytes: usize, t: f64) -> f64 {
    bytes as f64 / t
}

/// Memory-bound performance ceiling: the kernel GFLOPS scaled by how far its
/// bandwidth is from the bulk-copy bandwidth.
pub fn memcopy_roofline(gflops: f64, bw_effective: f64, bw_memcopy: f64) -> f64 {
    gflops * bw_memcopy / bw_effective
}

/// `cores * lanes * word bytes * clock`, in bytes per second.
pub fn shared_memory_bandwidth(cores: usize, simd_lanes: usize, word_bytes: usize, clock_hz: f64) -> f64 {
    (cores * simd_lanes * word_bytes) as f64 * clock_hz
}

pub fn shared_memory_roofline(bandwidth: f64, flops_per_block: f64, bytes_per_block: f64) -> f64 {
    bandwidth * flops_per_block / bytes_per_block
}

/// Minimum of the memory roofline and a compute ceiling (the shared memory
/// roofline on GPUs, a configured peak on CPUs).
pub fn combined_roofline(memcopy: f64, compute_ceiling: f64) -> f64 {
    memcopy.min(compute_ceiling)
}

/// Times both volume kernels over `k` elements, single worker.
pub fn time_kernels(n: usize, k: usize, repetitions: usize, compute_ceiling: f64) -> Result<BenchRecord> {
    if k == 0 || repetitions == 0 {
        return Err(SweError::InvalidArgument("bench needs k > 0 and repetitions > 0".into()));
    }
    let counts = count_ops(n, k)?;
    let ops = Operators1D::new(n)?;
    let nn = (n + 1) * (n + 1);
    let (w, dirs) = bench_field(n, k, 11);
    let mut out = vec![[0.0f64; 3]; k * nn];

    let mut run = |split: bool| {
        let mut times = Vec::with_capacity(repetitions);
        for _ in 0..repetitions {
            let t0 = Instant::now();
            for e in 0..k {
                let r = e * nn..(e + 1) * nn;
                if split {
                    split_volume(n, &w[r.clone()], &dirs[r.clone()], &ops.d_tilde, G, H_DES, &mut out[r]);
                } else {
                    standard_volume(n, &w[r.clone()], &dirs[r.clone()], &ops.d, G, H_DES, &mut out[r]);
                }
            }
            std::hint::black_box(&mut out);
            times.push(t0.elapsed().as_secs_f64().max(1e-9));
        }
        let m = mean(&times);
        (median(&mut times), m)
    };
    let (ts, ts_mean) = run(true);
    let (td, td_mean) = run(false);

    let bytes = k * nn * BYTES_PER_NODE;
    let t_mc = memcopy_time(bytes, repetitions).max(1e-9);
    let bw_mc = effective_bandwidth(bytes, t_mc);
    let bw_s = effective_bandwidth(bytes, ts);
    let bw_d = effective_bandwidth(bytes, td);
    let gf_s = counts.flops_split as f64 / ts * 1e-9;
    let gf_d = counts.flops_standard as f64 / td * 1e-9;
    Ok(BenchRecord {
        counts,
        workers: 1,
        repetitions,
        t_split_median: ts,
        t_split_mean: ts_mean,
        t_standard_median: td,
        t_standard_mean: td_mean,
        t_memcopy: t_mc,
        bytes,
        bw_split: bw_s,
        bw_standard: bw_d,
        bw_memcopy: bw_mc,
        roofline_split: combined_roofline(memcopy_roofline(gf_s, bw_s, bw_mc), compute_ceiling),
        roofline_standard: combined_roofline(memcopy_roofline(gf_d, bw_d, bw_mc), compute_ceiling),
    })
}

/// Element count that fills `budget_bytes` of kernel traffic at degree `n`.
pub fn elements_for_budget(n: usize, budget_bytes: usize) -> usize {
    (budget_bytes / ((n + 1) * (n + 1) * BYTES_PER_NODE)).max(1)
}

/// One record per degree `1..=nmax`, each with a similar memory load.
pub fn budget_table(nmax: usize, budget_bytes: usize, repetitions: usize, compute_ceiling: f64) -> Result<Vec<BenchRecord>> {
    (1..=nmax)
        .map(|n| time_kernels(n, elements_for_budget(n, budget_bytes), repetitions, compute_ceiling))
        .collect()
}

pub const TABLE_HEADER: &str =
    "N;K;DOFs;evals_split;evals_std;flops_split;flops_std;t_split;t_std;t_memcpy;bw_eff;roofline";

/// Semicolon separated row; bandwidth and roofline refer to the split kernel.
pub fn table_row(r: &BenchRecord) -> String {
    let c = &r.counts;
    format!(
        "{};{};{};{};{};{};{};{:.6e};{:.6e};{:.6e};{:.6e};{:.6e}",
        c.n,
        c.k,
        c.dofs,
        c.evals_split,
        c.evals_standard,
        c.flops_split,
        c.flops_standard,
        r.t_split_median,
        r.t_standard_median,
        r.t_memcopy,
        r.bw_split,
        r.roofline_split
    )
}

pub fn counts_row(c: &OpCounts) -> String {
    format!(
        "{};{};{};{};{};{};{};;;;;",
        c.n, c.k, c.dofs, c.evals_split, c.evals_standard, c.flops_split, c.flops_standard
    )
}

/// Cross-kernel sanity: both kernels give zero on a constant state. The split
/// kernel is fed `2D`, dropping the boundary part of `D~` that the surface
/// terms cancel in the full residual.
pub fn constant_state_residuals(n: usize) -> Result<(f64, f64)> {
    let ops = Operators1D::new(n)?;
    let nn = (n + 1) * (n + 1);
    let w = vec![[1.1, 0.3, -0.2]; nn];
    let dirs = vec![[0.5, -0.05, 0.0, 0.5]; nn];
    let mut out = vec![[0.0; 3]; nn];
    let norm = |o: &[[f64; 3]]| o.iter().flatten().fold(0.0f64, |a, v| a.max(v.abs()));
    let d2: Vec<f64> = ops.d.iter().map(|v| 2.0 * v).collect();
    split_volume(n, &w, &dirs, &d2, G, H_DES, &mut out);
    let a = norm(&out);
    standard_volume(n, &w, &dirs, &ops.d, G, H_DES, &mut out);
    Ok((a, norm(&out)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_counts() {
        let c = count_ops(3, 1).unwrap();
        assert_eq!((c.evals_split, c.evals_standard), (128, 32));
        let c = count_ops(15, 1).unwrap();
        assert_eq!(c.evals_split / c.evals_standard, 16);
        assert_eq!(count_ops(3, 5).unwrap().dofs, 3 * 5 * 16);
    }

    #[test]
    fn bandwidth_formulas() {
        assert_eq!(effective_bandwidth(1000, 0.5), 2.0 * effective_bandwidth(1000, 1.0));
        assert_eq!(memcopy_roofline(3.5, 10.0, 10.0), 3.5);
        assert_eq!(combined_roofline(3.5, 2.0), 2.0);
        let bw = shared_memory_bandwidth(20, 32, 4, 1.607e9);
        assert!((bw - 4113.92e9).abs() < 1e3);
    }

    #[test]
    fn constant_state_is_zero_for_both_kernels() {
        let (a, b) = constant_state_residuals(5).unwrap();
        assert!(a < 1e-12 && b < 1e-12, "{a} {b}");
    }

    #[test]
    fn degree_zero_rejected() {
        assert!(count_ops(0, 1).is_err());
    }
}
