"""Train on related synthetic tasks and inspect the fitted model.

Three tasks share a class-separation direction that rotates a little per
task; fitting them jointly lets every task borrow strength from the others.
"""

import numpy as np

from mtnpsvm import Hyperparams, count_support_vectors, fit, predict_batch, synth_blobs

dataset = synth_blobs(T=3, n_per_class=40, d=2, seed=2)
print(f"dataset: {dataset.n_tasks} tasks, {dataset.n_samples} samples, d={dataset.feature_dim}")

model = fit(dataset, Hyperparams(epsilon=0.1))

for task in dataset.tasks:
    predictions = predict_batch(model, task.X, task.task_id)
    accuracy = np.mean(predictions == task.y)
    print(f"task {task.task_id}: training accuracy {accuracy:.3f}")

for name, summary in (("problem 1", model.diagnostics.first),
                      ("problem 2", model.diagnostics.second)):
    print(f"{name}: {summary.status} after {summary.iterations} iterations, "
          f"residuals ({summary.final_primal_norm:.1e}, {summary.final_dual_norm:.1e})")

sv = count_support_vectors(model)
print(f"support vectors: problem 1 own/other = {sv.first_own}/{sv.first_other}, "
      f"problem 2 own/other = {sv.second_own}/{sv.second_other}")

kkt = model.diagnostics.kkt
print(f"complementarity: {kkt.complementarity_first:.2e} / {kkt.complementarity_second:.2e}")

# linear kernel: the per-task hyperplanes are explicit (last entry is the bias)
from mtnpsvm import recover_parameters

u, u_t, v, v_t = recover_parameters(model)
for t_pos, task_id in enumerate(model.task_ids):
    plane = u + u_t[t_pos]
    print(f"task {task_id} positive-class plane: w={plane[:-1].round(3)}, b={plane[-1]:.3f}")
