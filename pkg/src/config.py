"""
Простая конфигурация приложения из .env файла
"""
import os
from dotenv import load_dotenv

# Загружаем переменные окружения
load_dotenv()

# Физические параметры модели (значения /2π, как в подписях к рисункам)
OMEGA_GL_MHZ = float(os.getenv("OMEGA_GL_MHZ", "250"))  # Глобальная частота Раби |e>-|r>
DELTA_MHZ = float(os.getenv("DELTA_MHZ", "7300"))  # Отстройка промежуточного уровня
V0_MHZ = float(os.getenv("V0_MHZ", "450"))  # Ван-дер-ваальсово взаимодействие
OMEGA_C_MAX_MHZ = float(os.getenv("OMEGA_C_MAX_MHZ", "250"))
OMEGA_T_MAX_MHZ = float(os.getenv("OMEGA_T_MAX_MHZ", "230"))
GAMMA_E_MHZ = float(os.getenv("GAMMA_E_MHZ", "1.0"))
GAMMA_R_KHZ = float(os.getenv("GAMMA_R_KHZ", "0.5"))
ETA_E = float(os.getenv("ETA_E", "5000"))
ETA_R = float(os.getenv("ETA_R", "2000"))
T_TOTAL_US = float(os.getenv("T_TOTAL_US", "0.4"))
N_STEPS = int(os.getenv("N_STEPS", "100"))
XI_OMEGA = float(os.getenv("XI_OMEGA", "0.1"))
XI_PHI = float(os.getenv("XI_PHI", "0.1"))

# Тепловое движение
R0_UM = float(os.getenv("R0_UM", "2.0"))  # Межатомное расстояние
TRAP_FREQ_KHZ = float(os.getenv("TRAP_FREQ_KHZ", "100"))  # Частота ловушки ω/2π
LAMBDA1_NM = float(os.getenv("LAMBDA1_NM", "420"))
LAMBDA2_NM = float(os.getenv("LAMBDA2_NM", "1013"))
# Температуры по умолчанию для теплового анализа, мкК
THERMAL_TEMPERATURES_UK = [
    float(t) for t in os.getenv("THERMAL_TEMPERATURES_UK", "1,2,3,4,5,6,7,8,9,10").split(",") if t.strip()
]
REPORT_TEMPERATURE_UK = float(os.getenv("REPORT_TEMPERATURE_UK", "10"))
MONTE_CARLO_SHOTS = int(os.getenv("MONTE_CARLO_SHOTS", "200"))

# Пропагатор
# Что: число внутренних подшагов на один управляющий шаг (узлы трапеции для интегралов распада)
PROPAGATOR_SUBSTEPS = int(os.getenv("PROPAGATOR_SUBSTEPS", "8"))
TRACE_TOLERANCE = float(os.getenv("TRACE_TOLERANCE", "1e-9"))

# Среда
CUTOFF_THRESHOLD = float(os.getenv("CUTOFF_THRESHOLD", "0.02"))  # Доля от максимума амплитуды

# TRPO
TRPO_KL_BOUND = float(os.getenv("TRPO_KL_BOUND", "0.01"))
TRPO_DISCOUNT = float(os.getenv("TRPO_DISCOUNT", "0.99"))
TRPO_GAE_LAMBDA = float(os.getenv("TRPO_GAE_LAMBDA", "0.97"))
TRPO_EPISODES_PER_UPDATE = int(os.getenv("TRPO_EPISODES_PER_UPDATE", "20"))
TRPO_CG_ITERATIONS = int(os.getenv("TRPO_CG_ITERATIONS", "10"))
TRPO_CG_DAMPING = float(os.getenv("TRPO_CG_DAMPING", "0.1"))
TRPO_LINE_SEARCH_STEPS = int(os.getenv("TRPO_LINE_SEARCH_STEPS", "10"))
TRPO_LINE_SEARCH_SHRINK = float(os.getenv("TRPO_LINE_SEARCH_SHRINK", "0.8"))
TRPO_CRITIC_EPOCHS = int(os.getenv("TRPO_CRITIC_EPOCHS", "5"))
TRPO_CRITIC_STEP_SIZE = float(os.getenv("TRPO_CRITIC_STEP_SIZE", "1e-3"))
TRPO_INITIAL_STD = float(os.getenv("TRPO_INITIAL_STD", "0.3"))
SEED = int(os.getenv("SEED", "1"))

# Настройки обработки
MAX_WORKERS = int(os.getenv("MAX_WORKERS", "1"))
# Что: как часто (в обновлениях политики) писать чекпоинт
CHECKPOINT_EVERY = int(os.getenv("CHECKPOINT_EVERY", "50"))

# Пути
OUTPUT_ROOT = os.getenv("OUTPUT_ROOT", "./runs")

# Логирование
LOG_LEVEL = os.getenv("LOG_LEVEL", "INFO")
LOG_FILE = os.getenv("LOG_FILE", "./logs/app.log")
LOG_MAX_BYTES = int(os.getenv("LOG_MAX_BYTES", "10485760"))  # 10MB
LOG_BACKUP_COUNT = int(os.getenv("LOG_BACKUP_COUNT", "5"))
