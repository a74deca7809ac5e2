// Exact and simulated winding covariance of two particles on a star.
#include <iostream>

#include <treewind/commands.hpp>

int main()
{
    using namespace treewind;
    const WindingModel m(PlanarTree::star(4), 2);
    const Matrix exact = exact_covariance(m.chain(), m.basis);
    const McResult mc = mc_covariance(m.chain(), m.basis, 20000, 400, 7);

    std::cout << "critical cells: " << m.basis.rank() << "\n";
    for (std::size_t i = 0; i < m.basis.rank(); ++i)
        std::cout << "  " << m.basis.labels[i] << "\n";
    std::cout << "exact Sigma:\n" << exact << "\n";
    std::cout << "Monte Carlo Sigma (t = 20000, 400 replicates):\n" << mc.sigma << "\n";
    return 0;
}
