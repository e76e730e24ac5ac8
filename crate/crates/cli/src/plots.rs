//! Matplotlib scripts copied next to each run's CSV files. Run them from
//! the output directory: `python3 plot.py`.

pub const STEP_SWEEP: &str = r#"import numpy as np
import matplotlib.pyplot as plt

d = np.genfromtxt("sweep.csv", delimiter=",", names=True)
fig, ax = plt.subplots(figsize=(6, 4))
ax.plot(d["de_over_e"], d["r"], label="R")
ax.plot(d["de_over_e"], d["t"], label="T")
ax.plot(d["de_over_e"], d["r_transfer"], "k:", label="R, transfer matrix")
ax.set_xlabel(r"$\Delta E / E$")
ax.set_ylabel("probability")
ax.legend()
fig.tight_layout()
fig.savefig("step_sweep.png", dpi=150)
"#;

pub const SOFT_SWEEP: &str = r#"import numpy as np
import matplotlib.pyplot as plt

d = np.genfromtxt("sweep.csv", delimiter=",", names=True)
fig, ax = plt.subplots(figsize=(6, 4))
ax.loglog(d["k2_l"], d["r_soft"], label="tanh step")
ax.loglog(d["k2_l"], d["r_rect"], "--", label="rectangular step")
ax.loglog(d["k2_l"], d["r_transfer"], "k:", label="transfer matrix")
ax.set_xlabel(r"$k_2 L$")
ax.set_ylabel("R")
ax.legend()
fig.tight_layout()
fig.savefig("soft_step_sweep.png", dpi=150)
"#;

pub const UV_MAP: &str = r#"import numpy as np
import matplotlib.pyplot as plt

d = np.genfromtxt("uv.csv", delimiter=",", names=True)
u = np.unique(d["u"])
v = np.unique(d["v"])
r = d["r"].reshape(len(u), len(v)).T
fig, ax = plt.subplots(figsize=(5, 5))
ax.contourf(u, v, r, levels=[0.99, 1.0], colors=["0.7"])
ax.contour(u, v, r, levels=[0.99], colors="k", linewidths=0.8)
ax.set_xscale("log")
ax.set_yscale("log")
ax.set_xlabel("u")
ax.set_ylabel("v")
ax.set_title("R > 0.99")
fig.tight_layout()
fig.savefig("uv_map.png", dpi=150)
"#;

pub const PACKET_SCATTER: &str = r#"import numpy as np
import matplotlib.pyplot as plt

d = np.genfromtxt("snapshots.csv", delimiter=",", names=True)
frames = np.unique(d["frame"])
fig, axes = plt.subplots(len(frames), 1, figsize=(6, 1.2 * len(frames)), sharex=True)
for ax, f in zip(np.atleast_1d(axes), frames):
    s = d[d["frame"] == f]
    ax.plot(s["x"], s["density"], "k")
    scale = s["density"].max()
    ax.plot(s["x"], s["potential"] * scale, color="0.6", lw=0.8)
    ax.set_yticks([])
    ax.text(0.98, 0.8, f"{f:g}", transform=ax.transAxes, ha="right")
np.atleast_1d(axes)[-1].set_xlabel("x")
fig.tight_layout()
fig.savefig("packet_snapshots.png", dpi=150)

m = np.genfromtxt("momentum.csv", delimiter=",", names=True)
keep = m["density"] > m["density"].max() * 1e-6
fig, ax = plt.subplots(figsize=(6, 4))
ax.plot(m["k"][keep], m["density"][keep] / m["density"].max(), label="momentum density")
ax.plot(m["k"][keep], m["r_k"][keep], label="R(k)")
ax.set_xlabel("k")
ax.legend()
fig.tight_layout()
fig.savefig("packet_momentum.png", dpi=150)
"#;

pub const PROPAGATOR_CHECK: &str = r#"import numpy as np
import matplotlib.pyplot as plt

d = np.genfromtxt("convergence.csv", delimiter=",", names=True)
fig, ax = plt.subplots(figsize=(5, 4))
ax.loglog(d["dt"], d["error"], "o-", label="error")
ax.loglog(d["dt"], d["error"][0] * (d["dt"] / d["dt"][0]) ** 2, "k--", label=r"$\propto dt^2$")
ax.set_xlabel("dt")
ax.set_ylabel("error")
ax.legend()
fig.tight_layout()
fig.savefig("convergence.png", dpi=150)
"#;

pub const MESH_PATHOLOGY: &str = r#"import numpy as np
import matplotlib.pyplot as plt

d = np.genfromtxt("mean_x.csv", delimiter=",", names=True)
fig, ax = plt.subplots(figsize=(6, 4))
for n in np.unique(d["n_points"]):
    s = d[d["n_points"] == n]
    ax.plot(s["t"], s["mean_x"], label=f"N = {n:g}")
ax.set_xlabel("t")
ax.set_ylabel(r"$\langle x \rangle$")
ax.legend()
fig.tight_layout()
fig.savefig("mesh_pathology.png", dpi=150)
"#;

pub const GAMOW_CENSUS: &str = r#"import numpy as np
import matplotlib.pyplot as plt

m = np.genfromtxt("modes.csv", delimiter=",", names=True)
fig, ax = plt.subplots(figsize=(6, 4))
for alpha in np.unique(m["alpha"]):
    s = m[m["alpha"] == alpha]
    ax.plot(s["kappa_re"], s["kappa_im"], ".", label=f"alpha = {alpha:g}")
ax.axvline(0.5, color="0.6", lw=0.8)
ax.set_xlabel(r"Re $\kappa$")
ax.set_ylabel(r"Im $\kappa$")
ax.legend()
fig.tight_layout()
fig.savefig("census.png", dpi=150)

e = np.genfromtxt("eigenfunction.csv", delimiter=",", names=True)
fig, ax = plt.subplots(figsize=(6, 3))
ax.plot(e["x"], e["density"], "k")
ax.set_xlabel("x")
ax.set_ylabel(r"$|\psi_n(x)|^2$")
fig.tight_layout()
fig.savefig("eigenfunction.png", dpi=150)
"#;

pub const PLATEAU_DECAY: &str = r#"import json
import numpy as np
import matplotlib.pyplot as plt

d = np.genfromtxt("decay.csv", delimiter=",", names=True)
tau = json.load(open("summary.json"))["results"]["tau"]
fig, ax = plt.subplots(figsize=(6, 4))
ax.semilogy(d["t"] / tau, d["plateau_prob"], "k", label="on the plateau")
ax.semilogy(d["t"] / tau, np.exp(-d["t"] / tau) * d["plateau_prob"][0], "--", label=r"$e^{-t/\tau}$")
ax.set_xlabel(r"$t / \tau$")
ax.set_ylabel("probability")
ax.legend()
fig.tight_layout()
fig.savefig("decay.png", dpi=150)

fig, ax = plt.subplots(figsize=(6, 4))
ax.plot(d["t"] / tau, d["region_discrepancy"], label="growing region")
ax.plot(d["t"] / tau, d["doubled_region_discrepancy"], label="doubled region")
ax.plot(d["t"] / tau, d["plateau_discrepancy"], label="plateau")
ax.set_xlabel(r"$t / \tau$")
ax.set_ylabel("discrepancy")
ax.legend()
fig.tight_layout()
fig.savefig("discrepancy.png", dpi=150)

o = np.genfromtxt("off_plateau.csv", delimiter=",", names=True)
fig, ax = plt.subplots(figsize=(5, 4))
ax.loglog(o["alpha"], o["off_plateau_mass"], "o-")
ax.set_xlabel(r"$\alpha$")
ax.set_ylabel("initial mass off the plateau")
fig.tight_layout()
fig.savefig("off_plateau.png", dpi=150)
"#;

pub const SUPERPOSITION: &str = r#"import numpy as np
import matplotlib.pyplot as plt

d = np.genfromtxt("superposition.csv", delimiter=",", names=True)
fig, ax = plt.subplots(figsize=(6, 4))
ax.plot(d["t"], d["plateau_prob"], "k", label="superposition")
for name in d.dtype.names:
    if name.startswith("single_"):
        ax.plot(d["t"], d[name], "--", label=name.replace("_", " "))
ax.set_xlabel("t")
ax.set_ylabel("probability on the plateau")
ax.legend()
fig.tight_layout()
fig.savefig("superposition.png", dpi=150)
"#;
