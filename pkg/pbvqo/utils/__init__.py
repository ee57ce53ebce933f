import numpy as np


def derive_seed(master_seed, index):
    """The seed of run `index` in an ensemble seeded by `master_seed`.

    Two-level seeding through a numpy SeedSequence: the derived seeds are
    independent streams and only depend on (master_seed, index).

    :param master_seed: The ensemble seed, a non-negative integer.
    :param index: The run index, a non-negative integer.

    :return: (int) A 32 bits seed.
    """
    if master_seed < 0 or index < 0:
        raise ValueError("Seeds and indices must be non-negative, got {} and"
                         " {}".format(master_seed, index))
    sequence = np.random.SeedSequence([int(master_seed), int(index)])
    return int(sequence.generate_state(1)[0])


def wrap_angle(theta):
    """The representative of theta in (-pi, pi]."""
    return np.pi - np.mod(np.pi - np.asarray(theta, dtype=float), 2 * np.pi)


def random_pulse_params(rng, n_terms, amplitude_bound=5.0):
    """A starting point in the search box: A_i uniform in [-bound, bound]
    then phi_i uniform in [0, 2pi)."""
    amplitudes = rng.uniform(-amplitude_bound, amplitude_bound, n_terms)
    phases = rng.uniform(0, 2 * np.pi, n_terms)
    return np.concatenate([amplitudes, phases])


def summarize(values):
    """Box-plot statistics of an ensemble of error rates.

    Quartiles use linear interpolation. Whiskers reach the most extreme
    values within 1.5 IQR of the box, anything beyond is an outlier.

    :return: (dict) count, min, q1, median, q3, max, mean, best, whisker_low,
        whisker_high and outliers. Only the count is set for an empty
        ensemble.
    """
    values = np.asarray([v for v in values if v is not None], dtype=float)
    if len(values) == 0:
        return {"count": 0}
    q1, median, q3 = np.percentile(values, [25, 50, 75])
    iqr = q3 - q1
    inside = values[(values >= q1 - 1.5 * iqr) & (values <= q3 + 1.5 * iqr)]
    outliers = values[(values < q1 - 1.5 * iqr) | (values > q3 + 1.5 * iqr)]
    return {
        "count": len(values),
        "min": float(values.min()),
        "q1": float(q1),
        "median": float(median),
        "q3": float(q3),
        "max": float(values.max()),
        "mean": float(values.mean()),
        "best": float(values.min()),
        "whisker_low": float(inside.min()),
        "whisker_high": float(inside.max()),
        "outliers": sorted(float(v) for v in outliers),
    }


def histogram_counts(values_by_label, bins=20):
    """Count every ensemble on the same bins.

    :param values_by_label: A dict {label: error rates}.
    :param bins: The number of equal-width bins from 0 to the largest value.

    :return: (edges, {label: counts})
    """
    if bins < 1:
        raise ValueError("Need at least one bin, got {}".format(bins))
    everything = [v for values in values_by_label.values() for v in values]
    upper = max(everything) if everything else 0.0
    edges = np.linspace(0.0, upper if upper > 0 else 1.0, bins + 1)
    counts = {label: np.histogram(values, bins=edges)[0]
              for label, values in values_by_label.items()}
    return edges, counts
