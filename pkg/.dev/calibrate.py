"""Dev measurements: eigensolve-based calibrations and the evsum sweep."""
import numpy as np
import time

from evbounds import (
    GridSpec, PotentialSpec, sample_potential, OmegaSpec, draw_omega,
    build_net, SandwichEnsemble, singular_values, weak_schatten,
)
from evbounds.spectra import hamiltonian_matrix, eigenvalues_dense, SpectrumFilter, delta_dist
from evbounds.extension import _angular_conjugate
from evbounds.util import bracket

t0 = time.time()

def solve(gs, field):
    h = hamiltonian_matrix(gs, field.values)
    return eigenvalues_dense(h)

# --- evsum sweep structure (criterion 8 config) ---------------------------
gs2 = GridSpec(d=2, L=8.0, N=32)
print("== evsum structure: V = a*i*1_B(1), d=2, L=8, N=32 ==")
spectra = {}
for a in (1.0, 2.0, 4.0, 8.0):
    field = sample_potential(PotentialSpec(kind="indicator_ball", R=1.0, amplitude=a * 1j), gs2)
    pts = solve(gs2, field)
    zs = np.array([p.z for p in pts])
    spectra[a] = zs
    big = zs[np.abs(zs.imag) > 0.02]
    order = np.argsort(-np.abs(big.imag))
    print(f"a={a}: n={len(zs)} with |Im|>0.02: {len(big)}  [{time.time()-t0:.0f}s]")
    for z in big[order][:12]:
        print(f"    z = {z.real:+.4f} {z.imag:+.4f}i  |z|={abs(z):.4f} sqrt|z|={abs(z)**0.5:.4f}")

# window: 1/R0 <= sqrt|z| <= 1/h with R0=4, h=1/4 -> sqrt|z| in [0.25, 4]
print("\n== evsum fits under candidate filters (window sqrt|z| in [0.25,4]) ==")
for name, keep in [
    ("kappa=1 sector", lambda z: np.abs(z.imag) >= z.real),
    ("margin 0.5*(2pi/L)^2", lambda z: np.abs(z.imag) >= 0.5 * (2 * np.pi / 8.0) ** 2),
    ("margin 2*(2pi/L)^2", lambda z: np.abs(z.imag) >= 2 * (2 * np.pi / 8.0) ** 2),
]:
    lhs = []
    for a in (1.0, 2.0, 4.0, 8.0):
        zs = spectra[a]
        m = (np.abs(zs) >= 0.25 ** 2) & (np.abs(zs) <= 4.0 ** 2) & keep(zs)
        lhs.append(sum(delta_dist(z) for z in zs[m]))
    lhs = np.array(lhs)
    # rhs: weighted sup norm ||<x>^{1/2+3eps} V||_inf, eps=0.1
    rhs = []
    for a in (1.0, 2.0, 4.0, 8.0):
        field = sample_potential(PotentialSpec(kind="indicator_ball", R=1.0, amplitude=a * 1j), gs2)
        g = field.grid
        # weighted sup over support: <x> = 2+|x| at |x|<=1 -> max 3^{0.8}
        rhs.append(a * 3.0 ** 0.8)
    rhs = np.array(rhs)
    if np.all(lhs > 0):
        c2, logc1 = np.polyfit(np.log(rhs), np.log(lhs), 1)
        pred = logc1 + c2 * np.log(rhs)
        ss = 1 - np.sum((np.log(lhs) - pred) ** 2) / np.sum((np.log(lhs) - np.log(lhs).mean()) ** 2)
        print(f"{name}: lhs={np.round(lhs,4)} c2={c2:.3f} c1={np.exp(logc1):.4f} r2={ss:.4f}")
    else:
        print(f"{name}: lhs={np.round(lhs,4)}  (zero entries, no fit)")

# --- KLT d=2 q=3/2 calibration family ------------------------------------
print("\n== KLT d=2 q=3/2: V = a*(1+i)*1_B(1) ==")
ratios = []
for a in (0.5, 1.0, 2.0, 4.0, 8.0):
    field = sample_potential(PotentialSpec(kind="indicator_ball", R=1.0, amplitude=a * (1 + 1j)), gs2)
    pts = solve(gs2, field)
    zs = np.array([p.z for p in pts])
    sector = zs[np.abs(zs.imag) >= zs.real]  # kappa=1, scale-free discrete-state filter
    vals = np.abs(field.values)
    lq = float((vals ** 1.5).sum() * field.grid.cellvol)  # lq_norm^q = integral |V|^q
    if sector.size:
        lhs = float(np.abs(sector).max() ** 0.5)  # |z|^{q-d/2} = |z|^{1/2}
        ratios.append(lhs / lq)
        zmax = sector[np.argmax(np.abs(sector))]
        print(f"a={a}: n_sector={sector.size} max|z|={abs(zmax):.4f} at {zmax:.4f} lhs={lhs:.4f} rhs_raw={lq:.4f} ratio={lhs/lq:.4f}")
    else:
        print(f"a={a}: sector empty")
print(f"KLT max ratio: {max(ratios):.4f} -> frozen 1.1x = {1.1*max(ratios):.4f}  [{time.time()-t0:.0f}s]")

# --- SECTOR d=1 q=1 kappa=1 calibration family ----------------------------
print("\n== SECTOR d=1 q=1 kappa=1: V = a*i*1_[-1,1], N=512 L=32 ==")
gs1 = GridSpec(d=1, L=32.0, N=512)
sr = []
for a in np.linspace(0.5, 10.0, 20):
    field = sample_potential(PotentialSpec(kind="indicator_ball", R=1.0, amplitude=a * 1j), gs1)
    pts = solve(gs1, field)
    zs = np.array([p.z for p in pts])
    sector = zs[np.abs(zs.imag) >= zs.real]
    lhs = float(np.abs(sector).sum() ** 0.0) if False else float(np.sum(np.abs(sector) ** 0.5))
    rhs = 2.0 * (2.0 * a)  # (1+1/kappa)^q * integral |V|
    sr.append(lhs / rhs)
print("ratios:", np.round(sr, 4))
print(f"SECTOR max ratio: {max(sr):.4f} -> frozen 1.1x = {1.1*max(sr):.4f}  [{time.time()-t0:.0f}s]")

# --- SCHATTEN per-realization max ratio -----------------------------------
print("\n== SCHATTEN_DECAY per-realization ratio, nu=1 ==")
for R in (16.0, 32.0):
    gsr = GridSpec(d=2, L=4.0 * R, N=int(16 * R))
    field = sample_potential(PotentialSpec(kind="indicator_ball", R=R), gsr)
    net = build_net(1.0, R, 2)
    ens = SandwichEnsemble(net, net, field, 1.0)
    lr, lh = bracket(R), bracket(1.0)
    rhs = R ** 1.5 * np.sqrt(np.log(lr)) * lh * (np.log(lr) + np.log(lh)) ** 2
    rr = []
    for i in range(100):
        om = draw_omega(OmegaSpec(h=1.0, distribution="bernoulli", master_seed=2026, realization_index=i), gsr)
        s = singular_values(_angular_conjugate(ens.with_omega(om).matrix, 1.0, 1.0))
        rr.append(weak_schatten(s, 1.0) / rhs)
    print(f"R={R}: median={np.median(rr):.4f} max={np.max(rr):.4f}  [{time.time()-t0:.0f}s]")

# --- PROP_EXTNORM from stored campaign ------------------------------------
print("\n== PROP_EXTNORM mean/rhs from stored campaign ==")
for R in (8, 16, 32, 64):
    norms = np.loadtxt(f".dev/norms_R{R}.csv")
    rhs = R ** 0.5 * bracket(1.0) * np.log(bracket(float(R))) ** 2.5
    print(f"R={R}: mean={norms.mean():.4f} rhs_raw={rhs:.2f} ratio={norms.mean()/rhs:.4f}")
