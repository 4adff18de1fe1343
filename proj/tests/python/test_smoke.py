import math

import numpy as np
import pytest

import anipf


def test_anisotropy_values():
    a = anipf.regularized_l1(2, 0.01)
    assert a.gamma(np.array([1.0, 0.0])) == pytest.approx(1.01)
    g = a.gamma_grad(np.array([0.3, -0.4]))
    assert g.shape == (2,)
    report = anipf.check_inequalities(a, samples=2000, seed=1)
    assert report["failures"] == 0


def test_mesh_and_operators():
    m = anipf.Mesh.uniform(2, 0.5, 8)
    assert m.num_vertices == 81
    assert m.vertices().shape == (81, 2)
    assert m.elements().shape == (128, 3)
    d = anipf.lumped_mass(m)
    assert d.sum() == pytest.approx(1.0)
    k = anipf.assemble_stiffness(m)
    assert abs(k @ np.ones(81)).max() < 1e-12


def test_obstacle_solve():
    import scipy.sparse as sp

    a = sp.csc_matrix(np.array([[2.0, -1.0], [-1.0, 2.0]]))
    sol = anipf.solve_obstacle(a, np.array([10.0, 0.0]))
    assert sol["converged"]
    assert sol["x"][0] == 1.0
    assert sol["x"][1] == pytest.approx(0.5)


def test_stepper_energy_decreases():
    m = anipf.Mesh.uniform(2, 0.5, 32)
    a = anipf.regularized_l1(2, 0.3)
    c = anipf.SchemeConfig()
    c.scheme = "cahn_hilliard_neumann"
    c.tau = 1e-5
    c.t_end = 1e-4
    st = anipf.TimeStepper(m, a, c)
    s = st.initial_state(anipf.initial_profile(m, c.eps, radius=0.3))
    e0, mass0 = s.energy["E_gamma_h"], s.energy["mass"]
    for _ in range(3):
        s = st.step(s)
        assert s.converged
    assert s.energy["E_gamma_h"] < e0
    assert s.energy["mass"] == pytest.approx(mass0, abs=1e-12)


def test_run_config_and_level_set():
    text = "[domain]\nN = 32\n[scheme]\nscheme = allen_cahn\ntau = 1e-4\nt_end = 1e-3\n"
    assert "allen_cahn" in anipf.parse_config(text)
    out = anipf.run_config(text, max_steps=3)
    assert len(out["history"]) == 4
    assert out["energy_increases"] == 0
    m = anipf.Mesh.uniform(2, 0.5, 32)
    ls = anipf.zero_level_set(m, out["u"], np.zeros(2))
    assert ls["components"] == 1
    assert abs(ls["mean_radius"] - 0.3) < 0.05


def test_errors_surface_as_python_exceptions():
    with pytest.raises(ValueError):
        anipf.parse_config("[scheme]\nscheme = nope\ntau = 1\nt_end = 1\n")
    with pytest.raises(ValueError):
        anipf.regularized_l1(2, -1.0)
    assert math.isfinite(anipf.implicit_step_bound(anipf.SchemeConfig()))
