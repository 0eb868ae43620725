#include <doctest.h>

#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include "qtraj/propagators.hpp"

using namespace qtraj;

namespace {
const SystemConfig unit;
const auto harmonic = PotentialSpec::harmonic(1.0, 1.0);
}  // namespace

TEST_CASE("free kernel magnitude") {
  const KernelSpec k(ExactFreeKernel{}, unit);
  CHECK(std::abs(kernel(k, 0.3, -0.4, 1.0, 0.0)) == doctest::Approx(0.3989423).epsilon(1e-7));
}

TEST_CASE("Mehler and Van Vleck agree, also past the first caustic") {
  const KernelSpec mehler(MehlerKernel{1.0, 1.0}, unit);
  const KernelSpec vv(VanVleckKernel{harmonic}, unit);
  for (double t : {0.3, 1.2, 2.9, 4.0, 7.5}) {
    const cplx a = kernel(mehler, 0.8, -0.5, t, 0.0), b = kernel(vv, 0.8, -0.5, t, 0.0);
    CHECK(std::abs(a - b) <= 1e-12 * std::abs(a));
  }
}

TEST_CASE("Mehler kernel moves a Gaussian across the caustic") {
  const SpatialGrid g(-8.0, 8.0, 1024);
  const auto G = GaussianParams::normalized(1.0, 0.6, 0.5);
  const auto psi = apply_kernel(KernelSpec(MehlerKernel{1.0, 1.0}, unit), sample_gaussian(G, g, 1.0), 4.0, 0.0);
  const auto exact = sample_gaussian(gaussian_exact_evolve(G, harmonic, 4.0, 0.0, unit), g, 1.0);
  CHECK(l2_distance(psi, exact) < 1e-8);
}

TEST_CASE("one short-time slice matches its closed form") {
  const SpatialGrid g(-8.0, 8.0, 1601);
  const auto G = GaussianParams::normalized(0.5, 0.8, -0.3);
  const KernelSpec ks(KernerSutcliffeKernel{AveragedPotential(harmonic)}, unit);
  const auto psi = apply_kernel(ks, sample_gaussian(G, g, 1.0), 0.1, 0.0);
  const auto closed = sample_gaussian(gaussian_ks_closed_form(G, harmonic, 0.1, 0.0, unit), g, 1.0);
  CHECK(l2_distance(psi, closed) < 1e-8);
}

TEST_CASE("short-time kernel: relative error second order, absolute error below it") {
  const KernelSpec ks(KernerSutcliffeKernel{AveragedPotential(harmonic)}, unit);
  const KernelSpec mehler(MehlerKernel{1.0, 1.0}, unit);
  std::vector<ConvergenceSample> abs_err, rel_err;
  for (double dt : {0.2, 0.1, 0.05, 0.025}) {
    const cplx a = kernel(ks, 1.0, 0.0, dt, 0.0), b = kernel(mehler, 1.0, 0.0, dt, 0.0);
    abs_err.push_back({dt, std::abs(a - b)});
    rel_err.push_back({dt, std::abs(a - b) / std::abs(b)});
  }
  CHECK(fit_convergence_order(rel_err) == doctest::Approx(2.0).epsilon(0.02));
  CHECK(fit_convergence_order(abs_err) == doctest::Approx(1.5).epsilon(0.02));
}

TEST_CASE("under-resolved quadrature is refused with the admissible step") {
  const SpatialGrid g(-8.0, 8.0, 128);
  const auto psi0 = sample_gaussian(GaussianParams::normalized(0.0, 1.0), g, 1.0);
  try {
    apply_kernel(KernelSpec(ExactFreeKernel{}, unit), psi0, 1e-3, 0.0);
    FAIL("expected an aliasing error");
  } catch (const Error& e) {
    CHECK(std::string(e.what()).find("smallest admissible") != std::string::npos);
  }
}

TEST_CASE("time slicing records per-slice norm drift") {
  const SpatialGrid g(-8.0, 8.0, 1024);
  const auto psi0 = sample_gaussian(GaussianParams::normalized(1.0, std::sqrt(0.5)), g, 1.0);
  const KernelSpec ks(KernerSutcliffeKernel{AveragedPotential(harmonic)}, unit);
  const auto r = time_slice_evolve(ks, psi0, TimeWindow(0.0, 1.0, 8));
  CHECK(r.slice_norm_drift.size() == 8);

  // The short-time kernel is not unitary; a single slice loses norm at O(dt^2).
  std::vector<ConvergenceSample> drift;
  for (double dt : {0.4, 0.2, 0.1}) {
    drift.push_back({dt, time_slice_evolve(ks, psi0, TimeWindow(0.0, dt, 1)).slice_norm_drift[0]});
  }
  CHECK(fit_convergence_order(drift) >= 1.9);

  SliceOptions strict;
  strict.max_norm_drift = 1e-4;
  CHECK_THROWS_AS(time_slice_evolve(ks, psi0, TimeWindow(0.0, 1.0, 8), strict), Error);
}

TEST_CASE("Crank-Nicolson reference") {
  const SpatialGrid g(-12.0, 12.0, 2048);
  const auto G = GaussianParams::normalized(-1.0, 1.0, 1.0);
  const auto psi0 = sample_gaussian(G, g, 1.0);
  const auto psi = reference_evolve(PotentialSpec::free(), psi0, TimeWindow(0.0, 1.0, 1000), unit);
  CHECK(std::abs(l2_norm(psi) - l2_norm(psi0)) < 1e-10);
  const auto exact = sample_gaussian(gaussian_exact_evolve(G, PotentialSpec::free(), 1.0, 0.0, unit), g, 1.0);
  CHECK(l2_distance(psi, exact) < 1e-4);
  const auto snaps = reference_evolve_snapshots(PotentialSpec::free(), psi0, TimeWindow(0.0, 1.0, 10), unit, 100);
  CHECK(snaps.size() == 11);
  CHECK(l2_distance(snaps.back(), psi) < 1e-12);
}

TEST_CASE("reference refuses a grid too coarse for the energy") {
  const SpatialGrid g(-4.0, 4.0, 40);
  const auto psi0 = sample_gaussian(GaussianParams::normalized(0.0, 0.3, 6.0), g, 1.0);
  CHECK_THROWS_AS(reference_evolve(PotentialSpec::free(), psi0, TimeWindow(0.0, 1.0, 10), unit), Error);
}

TEST_CASE("reference refuses a packet that reaches the walls") {
  const SpatialGrid g(-6.0, 6.0, 1024);
  const auto psi0 = sample_gaussian(GaussianParams::normalized(2.0, 0.7, 3.0), g, 1.0);
  CHECK_THROWS_AS(reference_evolve(PotentialSpec::free(), psi0, TimeWindow(0.0, 1.5, 600), unit), Error);
}

TEST_CASE("energy of the harmonic ground state") {
  const SpatialGrid g(-8.0, 8.0, 801);
  const auto psi = sample_gaussian(GaussianParams::normalized(0.0, std::sqrt(0.5)), g, 1.0);
  CHECK(energy_expectation(harmonic, psi, unit) == doctest::Approx(0.5).epsilon(1e-8));
  CHECK(boundary_mass_fraction(psi, 10) < 1e-20);
}
