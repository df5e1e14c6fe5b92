import time
import numpy as np
import evbounds as ev
from evbounds.harness import ext_norm_samples, deterministic_ext_norm, fit_scaling

spec = ev.PotentialSpec(kind='indicator_ball', amplitude=1.0, R=1.0)
om = ev.OmegaSpec(h=1.0, distribution='bernoulli', master_seed=2026)
plan = [(8.0, 200), (16.0, 200), (32.0, 2000), (64.0, 200)]
means, dets = {}, {}
for R, n in plan:
    t0 = time.perf_counter()
    norms = ext_norm_samples(spec, om, 1.0, R, range(n))
    np.savetxt(f'.dev/norms_R{int(R)}.csv', norms)
    det = deterministic_ext_norm(spec, 1.0, R)
    means[R], dets[R] = norms.mean(), det
    print(f'R={R:4.0f} n={n}: mean={norms.mean():.4f} std={norms.std(ddof=1):.4f} det={det:.4f}  [{time.perf_counter()-t0:.0f}s]', flush=True)

rs = [8.0, 16.0, 32.0, 64.0]
sl_r, _, r2_r = fit_scaling(rs, [means[r] for r in rs])
sl_d, _, r2_d = fit_scaling(rs, [dets[r] for r in rs])
print(f'random slope {sl_r:.4f} (r2={r2_r:.4f}), det slope {sl_d:.4f} (r2={r2_d:.4f}), diff {sl_d-sl_r:.4f}')

norms32 = np.loadtxt('.dev/norms_R32.csv')
mu = norms32.mean()
for M in (1.25, 1.5, 2.0):
    k = int((norms32 > M * mu).sum())
    print(f'M={M}: hits={k}/2000 frac={k/2000:.5f}')
print('max/mean:', norms32.max() / mu)
