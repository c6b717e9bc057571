#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <hix/schreier.hpp>

#include <random>

using namespace hix;

TEST_CASE("doubled-family equivalence, exhaustively") {
  auto r1 = hat_equivalence_check(1, 20);
  CHECK(r1.all_pass());
  auto r2 = hat_equivalence_check(2, 20);
  CHECK(r2.all_pass());
  auto r3 = hat_equivalence_check(3, 14);
  CHECK(r3.all_pass());
  CHECK(r2.render() == hat_equivalence_check(2, 20).render());
  CHECK_THROWS_AS(hat_equivalence_check(4, 10), BudgetExceeded);
  CHECK_THROWS_AS(hat_equivalence_check(2, 30), BudgetExceeded);

  // the worked instances behind the lemma
  CHECK(member({FamilyKind::Schreier, Int(1)}, {2, 3}));
  CHECK(member({FamilyKind::SchreierFlat, Int(1)}, {4, 6}));
  CHECK(member({FamilyKind::SchreierFlat, Int(1)}, {2}));
}

TEST_CASE("interleaved product admissibility") {
  // {2,3} doubled to {4,6} with 3 and 5 slotted in
  CHECK(interleave_admissible({2, 3}, {3, 5}, 1));
  // no interleaved points: reduces to flat membership of the doubled set
  CHECK(interleave_admissible({2, 3}, {}, 1));
  CHECK_THROWS_AS(interleave_admissible({2, 3}, {5, 3}, 1), PatternViolation);
  CHECK_THROWS_AS(interleave_admissible({2, 3}, {3, 5, 7}, 1), PatternViolation);
  CHECK_THROWS_AS(interleave_admissible({2, 3, 4, 5}, {}, 1), InputError);

  // every valid pattern over a standard-family set is product-admissible
  std::mt19937 rng(20240817);
  for (int trial = 0; trial < 400; ++trial) {
    long n = 1 + (long)(rng() % 3);
    long start = n == 3 ? 2 : 2 + (long)(rng() % 8);  // order 3 explodes fast
    FiniteSet M = maximal_schreier_set(n, start);
    FiniteSet G;  // small random subset: hereditary, so still a member
    for (long v : M) {
      if (G.size() >= 6) break;
      if (rng() % 2) G.push_back(v);
    }
    if (G.empty()) G.push_back(M[rng() % M.size()]);
    size_t j = rng() % (G.size() + 1);
    std::vector<long> ks;
    long prev = 0;
    bool feasible = true;
    for (size_t i = 0; i < j; ++i) {
      long lo = prev + 1, hi = 2 * G[i] - 1;
      if (lo > hi) {
        feasible = false;
        break;
      }
      long k = lo + (long)(rng() % (hi - lo + 1));
      ks.push_back(k);
      prev = 2 * G[i];
    }
    if (!feasible) continue;
    CHECK(interleave_admissible(G, ks, n));
  }
}

TEST_CASE("slot descriptors for the variant") {
  SchreierVariantConfig cfg{desk_table("desk-hi")};
  auto even = schreier_family_descriptors(cfg, 2);
  CHECK(even.kind == FamilyKind::SchreierFlat);
  CHECK(even.order == 4);
  auto odd = schreier_family_descriptors(cfg, 1);
  CHECK(odd.kind == FamilyKind::FlatProductA2);
  CHECK(odd.order == 3);
  auto hiSide = schreier_family_descriptors(cfg, 1, false);
  CHECK(hiSide.kind == FamilyKind::Schreier);
  CHECK(hiSide.order == 3);
  CHECK_THROWS_AS(schreier_family_descriptors(cfg, 99), ScheduleExhausted);
}

TEST_CASE("maximal standard-family sets") {
  CHECK(maximal_schreier_set(1, 3) == FiniteSet{3, 4, 5});
  CHECK(maximal_schreier_set(2, 2) == FiniteSet{2, 3, 4, 5, 6, 7});
  CHECK(maximal_schreier_set(2, 1) == FiniteSet{1});
  CHECK(is_maximal_schreier(1, {3, 4, 5}));
  CHECK(!is_maximal_schreier(1, {3, 4}));       // extendable
  CHECK(!is_maximal_schreier(1, {3, 4, 5, 6})); // not even a member
  CHECK(is_maximal_schreier(2, maximal_schreier_set(2, 3)));
  // order 3 from 2: two maximal order-2 blocks, {2..7} and {8..2047}
  CHECK(maximal_schreier_set(3, 2).size() == 2046);
  CHECK_THROWS_AS(maximal_schreier_set(3, 3), BudgetExceeded);
}

TEST_CASE("restriction and lift run under the variant families") {
  auto hi = desk_table("desk-hi");
  CodingState coding;

  // even operation on the doubled side drops to the standard family
  auto fam = FamilyDescriptor{FamilyKind::SchreierFlat, hi.n(0)};
  auto f = make_record(
      TreeAnalysis::weighted(0, fam,
                             {TreeAnalysis::leaf(+1, 4), TreeAnalysis::leaf(+1, 6)}),
      hi);
  auto w = restrict_even_witness(f, hi, schreier_hi_family);
  REQUIRE(w.has_value());
  SparseVector want;
  want.set(2, Rat(1, 2));
  want.set(3, Rat(1, 2));
  CHECK(w->vec == want);

  // a maximal partner set lifts onto the doubled coordinates
  auto g = schreier_k_record(0, 2, hi);
  CHECK(support_of(g.vec) == FiniteSet{2, 3, 4, 5, 6, 7});  // maximal S:2 set
  auto phi = lift_witness(g, hi, coding, nullptr, schreier_ext_family);
  CHECK(restrict_to(phi.vec, Parity::Even) == hat(g.vec));
  auto back = restrict_even_witness(phi, hi, schreier_hi_family);
  REQUIRE(back.has_value());
  CHECK(back->vec == g.vec);

  // an odd-slot chain lifts into an interleaved-admissible node
  auto chain = make_record(
      TreeAnalysis::weighted(1, {FamilyKind::Schreier, hi.n(1)}, {g.tree}), hi);
  auto phi2 = lift_witness(chain, hi, coding, nullptr, schreier_ext_family);
  CHECK(restrict_to(phi2.vec, Parity::Even) == hat(chain.vec));

  // the interleaved pattern itself realizes at an odd slot
  auto ghat = lift_witness(g, hi, coding, nullptr, schreier_ext_family);
  auto pair = make_record(
      TreeAnalysis::weighted(1, {FamilyKind::FlatProductA2, hi.n(1)},
                             {TreeAnalysis::leaf(+1, 3), ghat.tree}),
      hi);
  CHECK(pair.vec.at(3) == Rat(1, 4));
  CHECK(interleave_admissible({2}, {3}, 3));  // the same minima pattern {3,4}
}
