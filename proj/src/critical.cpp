#include "nlepi/critical.hpp"

#include <algorithm>
#include <stdexcept>

namespace nlepi {

namespace {

double default_tol(double sigma, double tol) { return tol > 0 ? tol : 1e-4 * sigma; }

}  // namespace

CriticalLengthResult critical_length(const ModelParams& p, const CriticalOptions& opts) {
  const auto asym = lambda_A_closed_form(linearized_coefficients(p));
  if (!(asym.lambda_A > 0))
    throw NumericalError("no critical length: lambda_p < 0 for all l (lambda_A = " + std::to_string(asym.lambda_A) +
                         ")");
  const double sigma = p.kernels.min_scale();
  return bisect_length([&](double l) { return model_lambda_p(p, -l / 2, l / 2, opts.grid); }, sigma, 1e4 * sigma,
                       default_tol(sigma, opts.tol));
}

double zero_diffusion_lambda_p(const ModelParams& p, double l, const GridOptions& grid) {
  const auto op = assemble_block_operator(zero_diffusion_coefficients(p), p.kernels, model_grid(p, -l / 2, l / 2, grid));
  return principal_eigenpair(op).lambda_p;
}

CriticalLengthResult critical_length_zero_diffusion(const ModelParams& p, const CriticalOptions& opts) {
  if (!is_symmetric_case(p))
    throw std::invalid_argument("zero-diffusion critical length requires c = G'(0) and J12 = J21");
  const auto asym = lambda_A_closed_form(zero_diffusion_coefficients(p));
  if (!(asym.lambda_A > 0)) throw NumericalError("no critical length: zero-diffusion lambda_A <= 0");
  const double sigma = p.kernels.min_scale();
  return bisect_length([&](double l) { return zero_diffusion_lambda_p(p, l, opts.grid); }, sigma, 1e4 * sigma,
                       default_tol(sigma, opts.tol));
}

ModelParams comparison_model(const KernelSpec<double>& kernel, const ComparisonParams<double>& params) {
  ModelParams m;
  m.d1 = params.d1;
  m.d2 = params.d2;
  m.a = params.a;
  m.b = params.b;
  m.c = params.c;
  m.G = GFunction::rational(1.0, params.g0);
  m.kernels = KernelSet<double>::shared(kernel);
  return m;
}

ComparisonReport compare_shared_kernel_curves(const KernelSpec<double>& kernel, const ComparisonParams<double>& params,
                                  const std::vector<double>& l_grid, const ComparisonOptions& opts) {
  ComparisonReport rep;
  rep.params = params;
  const ModelParams model = comparison_model(kernel, params);
  const double sigma = kernel.scale;
  const double tol = default_tol(sigma, opts.tol);

  double dx_max = 0;
  for (double l : l_grid) {
    const auto g = make_grid(-l / 2, l / 2, sigma, opts.grid);
    dx_max = std::max(dx_max, g.dx);
    ComparisonRow row;
    row.l = l;
    row.nu = scalar_principal_eigenvalue<double>(kernel, 1, 0, g);
    row.closed = closed_form_lambdas(row.nu, params);
    row.lambda_p_matrix =
        principal_eigenpair(assemble_block_operator(linearized_coefficients(model), model.kernels, g)).lambda_p;
    rep.max_closed_vs_matrix = std::max(rep.max_closed_vs_matrix, std::abs(row.closed.lambda_p - row.lambda_p_matrix));
    if (!(row.closed.lambda1 > row.closed.lambda2)) rep.pointwise_12 = false;
    if (!(row.closed.lambda3 > row.closed.lambda4 && row.closed.lambda4 > row.closed.lambda_p))
      rep.pointwise_34p = false;
    rep.rows.push_back(row);
  }
  rep.quadrature_budget = 5 * dx_max * dx_max * (params.d1 + params.d2 + params.c * params.g0);

  using Pick = double (*)(const ClosedFormLambdas<double>&);
  const std::pair<const char*, Pick> closed_curves[] = {
      {"lambda1", [](const ClosedFormLambdas<double>& c) { return c.lambda1; }},
      {"lambda2", [](const ClosedFormLambdas<double>& c) { return c.lambda2; }},
      {"lambda3", [](const ClosedFormLambdas<double>& c) { return c.lambda3; }},
      {"lambda4", [](const ClosedFormLambdas<double>& c) { return c.lambda4; }},
      {"lambda_p_closed", [](const ClosedFormLambdas<double>& c) { return c.lambda_p; }},
  };

  auto locate = [&](auto&& curve, double dx_scale, ComparisonCurve& out) -> std::optional<double> {
    GridOptions g = opts.grid;
    g.dx_scale *= dx_scale;
    try {
      return bisect_length([&](double l) { return curve(l, g); }, sigma, 1e4 * sigma, tol).l_star;
    } catch (const NumericalError& e) {
      out.note = e.what();
      return std::nullopt;
    }
  };

  for (const auto& [name, pick] : closed_curves) {
    ComparisonCurve c;
    c.name = name;
    auto curve = [&, pick = pick](double l, const GridOptions& g) {
      const double nu = scalar_principal_eigenvalue<double>(kernel, 1, 0, make_grid(-l / 2, l / 2, sigma, g));
      return pick(closed_form_lambdas(nu, params));
    };
    c.l_star = locate(curve, 1.0, c);
    if (opts.refine && c.l_star) c.l_star_refined = locate(curve, 0.5, c);
    rep.curves.push_back(c);
  }
  {
    ComparisonCurve c;
    c.name = "lambda_p_matrix";
    auto curve = [&](double l, const GridOptions& g) { return model_lambda_p(model, -l / 2, l / 2, g); };
    c.l_star = locate(curve, 1.0, c);
    if (opts.refine && c.l_star) c.l_star_refined = locate(curve, 0.5, c);
    rep.curves.push_back(c);
  }

  auto L = [&](std::size_t i) { return rep.curves[i].l_star; };
  rep.chain_12 = L(0) && L(1) && *L(0) < *L(1);
  rep.chain_34p = L(2) && L(3) && L(5) && *L(2) < *L(3) && *L(3) < *L(5);
  return rep;
}

}  // namespace nlepi
