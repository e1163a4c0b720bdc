"""Success-history adaptive differential evolution with linear population
size reduction (an L-SHADE style reference optimizer).

current-to-pbest/1 mutation, binomial crossover, external archive, Lehmer
mean memory updates for F and CR, population shrinking linearly from
``pop_factor * D`` to ``min_pop`` over the evaluation budget.
"""
import numpy as np

DEFAULTS = {
    "pop_factor": 18.0,
    "min_pop": 4,
    "memory_size": 6,
    "p_best": 0.11,
    "arc_rate": 2.6,
}


class InvalidParameters(ValueError):
    pass


def _check(pop_factor, min_pop, memory_size, p_best, arc_rate, dim):
    if not pop_factor > 0 or round(pop_factor * dim) < 4:
        raise InvalidParameters("initial population must be at least 4")
    if int(min_pop) != min_pop or min_pop < 4:
        raise InvalidParameters("min_pop must be an integer >= 4")
    if int(memory_size) != memory_size or memory_size < 1:
        raise InvalidParameters("memory_size must be a positive integer")
    if not 0 < p_best <= 1:
        raise InvalidParameters("p_best must lie in (0, 1]")
    if arc_rate < 0:
        raise InvalidParameters("arc_rate must be >= 0")


def _bounce(mutant, parent, lower, upper):
    # out-of-range coordinates go halfway between the bound and the parent
    lower = np.broadcast_to(lower, mutant.shape)
    upper = np.broadcast_to(upper, mutant.shape)
    mutant = np.where(mutant < lower, (lower + parent) / 2, mutant)
    return np.where(mutant > upper, (upper + parent) / 2, mutant)


def _lehmer(values, weights):
    return float(np.sum(weights * values**2) / np.sum(weights * values))


def de_lpr(box, rng, pop_factor=18.0, min_pop=4, memory_size=6, p_best=0.11, arc_rate=2.6):
    dim = box.dim
    _check(pop_factor, min_pop, memory_size, p_best, arc_rate, dim)
    lower, upper = box.lower, box.upper
    n_init = int(round(pop_factor * dim))
    min_pop = int(min_pop)
    max_nfe = box.budget
    history = []

    pop = rng.uniform(lower, upper, (n_init, dim))
    fit = box.evaluate_batch(pop)
    if len(fit) < n_init:
        return {"final_population": len(fit), "population_history": [(box.n_evals, n_init)]}
    archive = np.empty((0, dim))
    mem_f = np.full(int(memory_size), 0.5)
    mem_cr = np.full(int(memory_size), 0.5)
    k = 0
    n_pop = n_init
    history.append((box.n_evals, n_pop))

    while not box.done:
        order = np.argsort(fit, kind="stable")
        n_top = max(int(round(p_best * n_pop)), 2)
        r = rng.integers(memory_size, size=n_pop)
        cr = np.clip(rng.normal(mem_cr[r], 0.1), 0.0, 1.0)
        cr[mem_cr[r] < 0] = 0.0
        f = mem_f[r] + 0.1 * np.tan(np.pi * (rng.random(n_pop) - 0.5))
        while np.any(f <= 0.0):
            bad = f <= 0.0
            f[bad] = mem_f[r[bad]] + 0.1 * np.tan(np.pi * (rng.random(int(bad.sum())) - 0.5))
        f = np.minimum(f, 1.0)

        idx = np.arange(n_pop)
        pbest = pop[order[rng.integers(n_top, size=n_pop)]]
        r1 = rng.integers(n_pop - 1, size=n_pop)
        r1 += r1 >= idx
        pool = n_pop + len(archive)
        r2 = rng.integers(pool, size=n_pop)
        clash = (r2 == idx) | (r2 == r1)
        while np.any(clash):
            r2[clash] = rng.integers(pool, size=int(clash.sum()))
            clash = (r2 == idx) | (r2 == r1)
        union = np.vstack([pop, archive]) if len(archive) else pop
        fc = f[:, None]
        mutant = pop + fc * (pbest - pop) + fc * (pop[r1] - union[r2])
        mutant = _bounce(mutant, pop, lower, upper)

        mask = rng.random((n_pop, dim)) < cr[:, None]
        mask[idx, rng.integers(dim, size=n_pop)] = True
        trials = np.where(mask, mutant, pop)
        values = box.evaluate_batch(trials)
        m = len(values)
        better_eq = values <= fit[:m]
        strict = values < fit[:m]
        s_f, s_cr = f[:m][strict], cr[:m][strict]
        s_df = (fit[:m] - values)[strict]
        archive = np.vstack([archive, pop[:m][strict]])
        sel = np.flatnonzero(better_eq)
        pop = pop.copy()
        fit = fit.copy()
        pop[sel] = trials[sel]
        fit[sel] = values[sel]

        arc_size = int(round(arc_rate * n_pop))
        if len(archive) > arc_size:
            keep = rng.choice(len(archive), arc_size, replace=False)
            archive = archive[np.sort(keep)]

        if len(s_f):
            w = s_df / np.sum(s_df)
            mem_f[k] = _lehmer(s_f, w)
            mem_cr[k] = -1.0 if s_cr.max() == 0 else _lehmer(s_cr, w)
            k = (k + 1) % int(memory_size)

        target = int(round((min_pop - n_init) / max_nfe * box.n_evals + n_init))
        target = max(target, min_pop)
        if target < n_pop:
            keep = np.argsort(fit, kind="stable")[:target]
            keep.sort()
            pop, fit = pop[keep], fit[keep]
            n_pop = target
            arc_size = int(round(arc_rate * n_pop))
            if len(archive) > arc_size:
                keep = rng.choice(len(archive), arc_size, replace=False)
                archive = archive[np.sort(keep)]
        history.append((box.n_evals, n_pop))

    return {"final_population": n_pop, "population_history": history}
