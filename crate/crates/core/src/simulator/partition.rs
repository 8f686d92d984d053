use crate::error::{Error, Result};
use crate::models::{Dataset, Shard, ShardOwner};
use crate::numerics::RngStream;

#[derive(Debug, Clone, PartialEq)]
pub struct Partition {
    pub shards: Vec<Shard>,
    pub validation: Shard,
    pub test: Shard,
}

/// Splits rows into a validation subset, a test subset, and `n_workers`
/// disjoint worker shards.
///
/// Rows are shuffled within each class and then interleaved class by class,
/// so every contiguous slice of the resulting order (each split is one)
/// draws from all classes in proportion.
pub fn partition_data(
    dataset: &Dataset,
    n_workers: usize,
    val_frac: f64,
    test_frac: f64,
    rng: &mut RngStream,
) -> Result<Partition> {
    let m = dataset.len();
    let n_val = (m as f64 * val_frac).round() as usize;
    let n_test = (m as f64 * test_frac).round() as usize;
    if n_workers == 0 {
        return Err(Error::domain("need at least one worker"));
    }
    if n_val == 0 || n_test == 0 {
        return Err(Error::domain(format!(
            "{m} rows leave an empty validation or test split"
        )));
    }
    let n_train = m
        .checked_sub(n_val + n_test)
        .filter(|&r| r >= n_workers)
        .ok_or_else(|| {
            Error::domain(format!(
                "{m} rows cannot give {n_workers} workers a nonempty shard"
            ))
        })?;

    let mut by_class: Vec<Vec<usize>> = vec![Vec::new(); dataset.num_classes()];
    for (i, &y) in dataset.labels().iter().enumerate() {
        by_class[y].push(i);
    }
    for rows in &mut by_class {
        rng.shuffle(rows);
    }
    let longest = by_class.iter().map(Vec::len).max().unwrap_or(0);
    let order: Vec<usize> = (0..longest)
        .flat_map(|i| by_class.iter().filter_map(move |rows| rows.get(i).copied()))
        .collect();

    let validation = Shard::new(ShardOwner::Validation, order[..n_val].to_vec());
    let test = Shard::new(ShardOwner::Test, order[n_val..n_val + n_test].to_vec());
    let train = &order[n_val + n_test..];

    let base = n_train / n_workers;
    let extra = n_train % n_workers;
    let mut start = 0;
    let shards = (0..n_workers)
        .map(|w| {
            let len = base + usize::from(w < extra);
            let shard = Shard::new(ShardOwner::Worker(w), train[start..start + len].to_vec());
            start += len;
            shard
        })
        .collect();

    Ok(Partition {
        shards,
        validation,
        test,
    })
}
