#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "traplab/experiments.hpp"
#include "traplab/scattering.hpp"

namespace py = pybind11;
using namespace traplab;

namespace {

Grid make_grid(int d, double R, int n, const std::string& bc) {
    return Grid(d, R, n, bc == "periodic" ? Bc::periodic : Bc::dirichlet);
}

py::array_t<double> field_to_array(const std::vector<double>& v) {
    py::array_t<double> out(static_cast<py::ssize_t>(v.size()));
    std::copy(v.begin(), v.end(), out.mutable_data());
    return out;
}

std::vector<double> array_to_vec(const py::array_t<double, py::array::c_style>& a) {
    return std::vector<double>(a.data(), a.data() + a.size());
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "trapped interacting particles and paths: C++ core bindings";

    py::class_<TrapPotential>(m, "TrapPotential")
        .def("__call__",
             [](const TrapPotential& w, const std::vector<double>& x) {
                 return w(std::span<const double>(x.data(), x.size()));
             })
        .def("capped", &TrapPotential::capped)
        .def("describe", &TrapPotential::describe);
    m.def("trap_power", &TrapPotential::power, py::arg("p"), py::arg("offset") = 0.0);
    m.def("trap_hard_box", &TrapPotential::hard_box, py::arg("R_wall"), py::arg("offset") = 0.0);

    py::class_<PairPotential>(m, "PairPotential")
        .def("__call__", [](const PairPotential& v, double r) { return v(r); })
        .def("capped", &PairPotential::capped)
        .def("truncated", &PairPotential::truncated)
        .def("hard_core_radius", &PairPotential::hard_core_radius)
        .def("describe", &PairPotential::describe);
    m.def("pair_zero", &PairPotential::zero);
    m.def("pair_gaussian", &PairPotential::gaussian, py::arg("c"), py::arg("sigma"));
    m.def("pair_square_well", &PairPotential::square_well, py::arg("c"), py::arg("R0"));
    m.def("pair_inverse_power", &PairPotential::inverse_power, py::arg("c"), py::arg("gamma"));
    m.def("pair_capped_hard_core", &PairPotential::capped_hard_core, py::arg("M"), py::arg("a"));

    m.def("classify_pair", [](const PairPotential& v, int d) {
        return classify_pair(v, d) == PairClass::soft_core ? "soft-core" : "hard-core";
    });
    m.def("alpha_tilde", &alpha_tilde, py::arg("v"), py::arg("d"));
    m.def("rescale_pair",
          [](const PairPotential& v, const std::string& scheme, double arg, int d) {
              return rescale_pair(
                  v, scheme == "gp-xi" ? RescaleScheme::gp_xi : RescaleScheme::thm114, arg, d);
          },
          py::arg("v"), py::arg("scheme"), py::arg("xi_or_N"), py::arg("d"));

    py::class_<Grid>(m, "Grid")
        .def_readonly("dim", &Grid::dim)
        .def_readonly("n", &Grid::n)
        .def_readonly("half_width", &Grid::half_width)
        .def("spacing", &Grid::spacing)
        .def("cells", &Grid::cells);
    m.def("grid", &make_grid, py::arg("d"), py::arg("R"), py::arg("n"),
          py::arg("bc") = "dirichlet");

    m.def("kinetic_energy", [](const Grid& g, py::array_t<double, py::array::c_style> a) {
        return kinetic_energy(ScalarField(g, array_to_vec(a)));
    });
    m.def("dv_rate", [](const Grid& g, py::array_t<double, py::array::c_style> a) {
        return dv_rate(DensityField(g, array_to_vec(a)));
    });
    m.def("tv_distance",
          [](const Grid& g, py::array_t<double, py::array::c_style> a,
             py::array_t<double, py::array::c_style> b) {
              return tv_distance(DensityField(g, array_to_vec(a)), DensityField(g, array_to_vec(b)));
          });

    m.def("alpha_d3", [](const PairPotential& v) {
        ScatteringSolution s = alpha_d3(v);
        return py::dict(py::arg("alpha") = s.alpha, py::arg("residual") = s.residual,
                        py::arg("R_max") = s.R_max);
    });
    m.def("alpha_d2", [](const PairPotential& v, double R_star, double R) {
        ScatteringSolution s = alpha_d2(v, R_star, R);
        return py::dict(py::arg("alpha") = s.alpha, py::arg("residual") = s.residual);
    }, py::arg("v"), py::arg("R_star") = 0.0, py::arg("R") = 0.0);
    m.def("scattering_inequality", [](const PairPotential& v) {
        ScatteringInequalityReport r = inequality_report(v);
        return py::dict(py::arg("alpha") = r.alpha, py::arg("alpha_tilde") = r.alpha_tilde,
                        py::arg("identity_residual") = r.identity_residual,
                        py::arg("strict") = r.strict_inequality);
    });

    m.def("gp_minimize",
          [](const TrapPotential& W, double alpha, const Grid& g, double tol) {
              GpOptions opts;
              opts.tol = tol;
              GPResult r = gp_minimize(W, alpha, g, opts);
              return py::dict(py::arg("chi_gp") = r.chi_gp,
                              py::arg("iterations") = r.iterations,
                              py::arg("phi") = field_to_array(r.phi.values));
          },
          py::arg("W"), py::arg("alpha"), py::arg("grid"), py::arg("tol") = 1e-9);

    m.def("hartree_minimize",
          [](const TrapPotential& W, const PairPotential& v, int N, const Grid& g, double tol,
             int multistarts, std::uint64_t seed) {
              HartreeProblem prob;
              prob.W = W;
              prob.v = v;
              prob.N = N;
              prob.grid = g;
              HartreeOptions opts;
              opts.tol = tol;
              opts.multistarts = multistarts;
              opts.seed = seed;
              ProductState st = hartree_minimize(prob, opts);
              py::list hs;
              for (const auto& h : st.h) hs.append(field_to_array(h.values));
              return py::dict(py::arg("chi_product") = st.chi_product,
                              py::arg("lambda") = st.lambda, py::arg("h") = hs,
                              py::arg("sweeps") = st.sweeps);
          },
          py::arg("W"), py::arg("v"), py::arg("N"), py::arg("grid"), py::arg("tol") = 1e-9,
          py::arg("multistarts") = 4, py::arg("seed") = 1);

    m.def("hartree_minimize_dirac",
          [](const TrapPotential& W, double lam, int N, const Grid& g, double tol,
             int multistarts, std::uint64_t seed) {
              HartreeProblem prob;
              prob.W = W;
              prob.mode = HartreeMode::dirac;
              prob.dirac_lambda = lam;
              prob.N = N;
              prob.grid = g;
              HartreeOptions opts;
              opts.tol = tol;
              opts.multistarts = multistarts;
              opts.seed = seed;
              ProductState st = hartree_minimize(prob, opts);
              py::list hs;
              for (const auto& h : st.h) hs.append(field_to_array(h.values));
              return py::dict(py::arg("chi_dirac") = st.chi_product, py::arg("lambda") = st.lambda,
                              py::arg("h") = hs);
          },
          py::arg("W"), py::arg("coupling"), py::arg("N"), py::arg("grid"), py::arg("tol") = 1e-9,
          py::arg("multistarts") = 2, py::arg("seed") = 1);

    m.def("canonical_ground",
          [](const TrapPotential& W, const PairPotential& v, int N, const Grid& g, double tol) {
              CanonicalOptions opts;
              opts.tol = tol;
              CanonicalGroundState gs = canonical_ground(W, v, N, g, opts);
              return py::dict(py::arg("chi_N") = gs.chi_N, py::arg("eigenvalue") = gs.eigenvalue,
                              py::arg("h_star") = field_to_array(gs.h_star.values));
          },
          py::arg("W"), py::arg("v"), py::arg("N"), py::arg("grid"), py::arg("tol") = 1e-10);

    m.def("fk_oracle",
          [](const TrapPotential& W, const PairPotential& v, int N, const Grid& g, double beta) {
              FkResult r = fk_oracle(W, v, N, g, beta);
              return py::dict(py::arg("log_value") = r.log_value, py::arg("slope") = r.slope);
          },
          py::arg("W"), py::arg("v"), py::arg("N"), py::arg("grid"), py::arg("beta"));

    m.def("ctrw_local_time_checks", [](int N, double beta, int d, std::uint64_t seed, double p) {
        auto trajs = ctrw_simulate(N, beta, d, seed);
        py::list sums, identities;
        double xi = xi_beta(beta, p);
        for (int i = 0; i < N; ++i) {
            auto lt = local_times(trajs[i]);
            double s = 0.0;
            for (auto& [z, t] : lt) s += t;
            sums.append(s);
        }
        for (int i = 0; i < N; ++i)
            for (int j = i + 1; j < N; ++j) {
                auto li = local_times(trajs[i]);
                auto lj = local_times(trajs[j]);
                double lhs = std::pow(beta, (d + p) / (2.0 + p)) * intersection_alpha(li, lj, beta);
                double rhs = std::pow(beta, p / (2.0 + p)) * rescaled_inner(li, lj, beta, xi, d);
                identities.append(py::make_tuple(lhs, rhs));
            }
        return py::dict(py::arg("local_time_sums") = sums, py::arg("identities") = identities);
    });

    m.attr("__version__") = "0.1.0";
}
