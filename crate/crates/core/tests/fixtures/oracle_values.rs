// Generated by tests/oracle/oracle.py (mpmath, 50 digits). Do not edit.

pub const SWITCHING_RATE_A1000_E02_T300: f64 = 0.43666449029928014;
pub const PF_J0_1EM2_BETA_1EM3_FIELD_1E6: f64 = 0.027182818284590452;
pub const ERFC_CASES: [(f64, f64); 8] = [(0.0, 1.0), (0.1, 0.88753708398171511), (0.5, 0.47950012218695346), (1.0, 0.15729920705028513), (2.0, 0.0046777349810472658), (3.5, 7.4309837234141275e-7), (5.0, 1.5374597944280349e-12), (-1.5, 1.9661051464753107)];
pub const GAMMA_Q_CASES: [(f64, f64, f64); 9] = [(0.5, 0.1, 0.65472084601857703), (2.5, 3.0, 0.3062189184132784), (5.0, 5.0, 0.44049328506521241), (10.0, 20.0, 0.0049954123083075872), (4.0, 0.5, 0.99824837744370918), (128.0, 140.0, 0.14492251808246529), (1024.0, 980.0, 0.91693525830850861), (8192.0, 8300.0, 0.11668596970853692), (1.5, 40.0, 3.0692774861724171e-17)];
pub const LN_GAMMA_CASES: [(f64, f64); 5] = [(0.5, 0.57236494292470009), (1.0, 0.0), (3.7, 1.4280723266653879), (10.0, 12.80182748008147), (150.25, 601.26150403249973)];
pub const FREQUENCY_1011010101: f64 = 0.52708925686553809;
pub const BLOCK_FREQ_BITS: &str = "11110101101001100011";
pub const BLOCK_FREQ_M4: f64 = 0.54941595135278023;
pub const RUNS_1001101011: f64 = 0.14723225536366556;
pub const CUSUM_BITS: &str = "11001001000011111101";
pub const CUSUM_FORWARD: f64 = 0.72762151091264572;
pub const CUSUM_BACKWARD: f64 = 0.35936799564176637;
pub const SERIAL_BITS: &str = "01101100011101001011";
pub const SERIAL_PSI2_M3: [f64; 3] = [4.8, 1.2, 0.2];
pub const SERIAL_P_M3: [f64; 2] = [0.46283688702044231, 0.2725317930340126];
pub const APEN_BITS: &str = "0100110101110010";
pub const APEN_M2: (f64, f64) = (0.53997869843606268, 0.29756581634818767);
pub const TEMPLATE_BITS: &str = "10100100101110010110";
pub const TEMPLATE_001_COUNTS: [usize; 2] = [2, 1];
pub const TEMPLATE_001_N2: f64 = 0.34415378686541239;
pub const TEMPLATE_111_ZEROS_N2: f64 = 0.1184418290138037;
pub const FFT_BITS: &str = "11001100110011001100";
pub const FFT_D: f64 = -1.0259783520851541;
pub const FFT_P: f64 = 0.30490178817878833;
pub const FFT_ALTERNATING_D: f64 = 1.0259783520851541;
pub const FFT_ALTERNATING_P: f64 = 0.30490178817878833;
pub const LONGEST_RUN_6272_COUNTS: [u64; 6] = [8, 7, 11, 10, 7, 6];
pub const LONGEST_RUN_6272: f64 = 0.53967747169331023;
pub const EXCURSION_BITS: &str = "11110000000111110110";
pub const EXCURSION_CYCLES: usize = 3;
pub const EXCURSION_VISITS: [[u32; 19]; 3] = [[0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 2, 2, 2, 1, 0, 0, 0, 0, 0], [0, 0, 0, 0, 0, 0, 1, 2, 2, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0], [0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 2, 3, 1, 0, 0, 0, 0, 0, 0]];
pub const EXCURSION_P: [f64; 8] = [0.99450597781886907, 0.059913625804215203, 0.3171811183579036, 0.80135892220769107, 0.13879662766530171, 0.01537585567774376, 0.00023719152681813263, 0.0013292614715568957];
pub const EXCURSION_VARIANT_P: [f64; 18] = [0.76643271645414565, 0.75182963404584928, 0.73409518231947575, 0.71192315069219005, 0.6830913983096087, 0.64342884356362052, 0.71500065468808919, 0.8136637157667919, 0.6830913983096087, 0.6830913983096087, 0.63735188823393707, 1.0, 0.75762072368339654, 0.6830913983096087, 0.71192315069219005, 0.73409518231947575, 0.75182963404584928, 0.76643271645414565];
pub const HPF_A_DEFAULT: f64 = 0.76094277638931174;
pub const HPF_STEP_AT_3: [f64; 10] = [0.0, 0.0, 0.0, 0.76094277638931174, 0.5790339089390741, 0.44061167029165496, 0.33528026770126395, 0.25512909777315148, 0.19413864399720206, 0.14772839876768712];
pub const HPF_ALTERNATING_100: [f64; 100] = [0.0, -1.5218855527786235, 0.3638177349004753, -1.2450410754837852, 0.57448054008125731, -1.0847387356275603, 0.69646144763315615, -0.9919182451685304, 0.76709252934886796, -0.9381720337483963, 0.80799032068731173, -0.90705115485913015, 0.83167152867298544, -0.88903111070625886, 0.8453837511013293, -0.87859689410116709, 0.85332359285425529, -0.87255512887360381, 0.85792103046080969, -0.86905674193699567, 0.86058310272923639, -0.86703105727411006, 0.86212453284070181, -0.86585811716548148, 0.86301707314350003, -0.86517894506943085, 0.86353388424391494, -0.86478568139581231, 0.86383313539557129, -0.86455796839363323, 0.86400641195966939, -0.86442611484386522, 0.86410674496590664, -0.86434976716753556, 0.86416484117870381, -0.86430555927407198, 0.86419848085589431, -0.8642799614047138, 0.86421795936967337, -0.86426513937035882, 0.86422923808964719, -0.86425655690986783, 0.86423576885096145, -0.86425158737422142, 0.8642395503832136, -0.86424870984457046, 0.86424174001861534, -0.86424704365732858, 0.86424300789176116, -0.86424607887841689, 0.86424374203330483, -0.86424552023871239, 0.86424416712615257, -0.86424519676738061, 0.86424441326932586, -0.86424500946651093, 0.86424455579456965, -0.86424490101295622, 0.86424463832151868, -0.8642448382146705, 0.86424468610742057, -0.86424480185233364, 0.86424471377707814, -0.86424478079730759, 0.86424472979874812, -0.86424476860573355, 0.86424473907583831, -0.86424476154639878, 0.86424474444758811, -0.86424475745880458, 0.86424474755801339, -0.86424475509194893, 0.86424474935905511, -0.86424475372145925, 0.86424475040191933, -0.86424475292789925, 0.86424475100577307, -0.8642447524684011, 0.86424475135542487, -0.86424475220233609, 0.86424475155788512, -0.86424475204827543, 0.86424475167511646, -0.86424475195906909, 0.86424475174299739, -0.86424475190741559, 0.86424475178230275, -0.86424475187750646, 0.86424475180506188, -0.86424475186018806, 0.86424475181824019, -0.86424475185016012, 0.86424475182587088, -0.8642447518443536, 0.86424475183028931, -0.86424475184099143, 0.86424475183284773, -0.86424475183904462, 0.86424475183432914, -0.86424475183791735];
