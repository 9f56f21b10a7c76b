"""Drift of a resting disc under small oscillating loads.

A 1 kg disc gets a tangential load oscillating well below breakaway.  Plain
LuGre bristles creep a little every cycle; the Elasto-Plastic variant stays
elastic and returns to the same place.  Takes about 20 s.
"""
from planar_friction.simulation import drift_tangential


def main():
    for model in ("distributed", "reduced_ls"):
        lugre = drift_tangential(model, elasto_plastic=False)
        ep = drift_tangential(model, elasto_plastic=True)
        print(f"{model:12s} LuGre drift {lugre.net_drift * 1e6:8.4f} um"
              f"   Elasto-Plastic drift {ep.net_drift * 1e6:8.4f} um"
              f"   (breakaway {lugre.f_breakaway:.2f} N)")


if __name__ == "__main__":
    main()
