use crate::error::{Error, Result};
use crate::models::Shard;
use crate::numerics::{sample_exponential, UniformSource};

#[derive(Debug, Clone, PartialEq)]
pub struct WorkerSpec {
    pub id: usize,
    pub honest: bool,
    /// Mean response time in seconds.
    pub delay_scale: f64,
    pub shard: Shard,
}

/// When a worker's gradient reaches the server, relative to round start.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Arrival {
    pub worker_id: usize,
    pub arrival_time: f64,
}

/// Draws one exponential delay per worker from that worker's own stream and
/// returns the arrivals in processing order: ascending time, then worker id.
pub fn sample_arrivals<U: UniformSource>(workers: &[WorkerSpec], streams: &mut [U]) -> Result<Vec<Arrival>> {
    if workers.len() != streams.len() {
        return Err(Error::domain(format!(
            "{} workers but {} delay streams",
            workers.len(),
            streams.len()
        )));
    }
    let mut arrivals = workers
        .iter()
        .zip(streams.iter_mut())
        .map(|(w, s)| {
            Ok(Arrival {
                worker_id: w.id,
                arrival_time: sample_exponential(w.delay_scale, s.next_uniform())?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    arrivals.sort_by(|a, b| {
        a.arrival_time
            .total_cmp(&b.arrival_time)
            .then(a.worker_id.cmp(&b.worker_id))
    });
    Ok(arrivals)
}
